// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Each criterion pins its tolerance in code; Monte Carlo pieces run on
// fixed seeds so a pass is reproducible.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "paw/analysis.hpp"
#include "paw/engine.hpp"
#include "paw/limit_continuous.hpp"
#include "paw/limit_discrete.hpp"
#include "paw/model.hpp"

namespace fs = std::filesystem;
using namespace paw;

namespace {

struct Fail {
    std::string msg;
};

void ensure(bool cond, const std::string& msg) {
    if (!cond) throw Fail{msg};
}

int g_failures = 0;

void criterion(int id, const std::string& name, const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
        const std::string detail = body();
        const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        std::printf("[PASS] criterion %d: %s (%s; %.1fs)\n", id, name.c_str(), detail.c_str(),
                    secs.count());
    } catch (const Fail& f) {
        const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        std::printf("[FAIL] criterion %d: %s (%s; %.1fs)\n", id, name.c_str(), f.msg.c_str(),
                    secs.count());
        ++g_failures;
    } catch (const std::exception& e) {
        std::printf("[FAIL] criterion %d: %s (exception: %s)\n", id, name.c_str(), e.what());
        ++g_failures;
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

ModelConfig ab_config() {
    ModelConfig cfg;
    cfg.x_law = WeightLaw::discrete({{1, 1.0}});
    cfg.nu_law = AuthorCountLaw::constant(1);
    cfg.bonus = BonusScheme::full_bonus(WeightLaw::discrete({{1, 1.0}}));
    cfg.mode = Mode::Discrete;
    return cfg;
}

ModelConfig full_bonus_nu2_config() {
    auto cfg = ab_config();
    cfg.nu_law = AuthorCountLaw::constant(2);
    return cfg;
}

ModelConfig exp_config() {
    ModelConfig cfg;
    cfg.x_law = WeightLaw::exponential(1.0);
    cfg.nu_law = AuthorCountLaw::constant(1);
    cfg.bonus = BonusScheme::full_bonus(WeightLaw::exponential(1.0));
    cfg.mode = Mode::Continuous;
    return cfg;
}

ModelConfig equal_split_cont_config() {
    ModelConfig cfg;
    cfg.x_law = WeightLaw::exponential(1.0);
    cfg.nu_law = AuthorCountLaw::constant(2);
    cfg.bonus = BonusScheme::equal_split(WeightLaw::gamma(2.0, 1.0));
    cfg.mode = Mode::Continuous;
    return cfg;
}

void enumerate_sets(std::size_t n, std::size_t k, std::vector<std::uint32_t>& cur,
                    std::size_t from,
                    const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
    if (cur.size() == k) {
        visit(cur);
        return;
    }
    for (std::size_t i = from; i < n; ++i) {
        cur.push_back(static_cast<std::uint32_t>(i));
        enumerate_sets(n, k, cur, i + 1, visit);
        cur.pop_back();
    }
}

double binom(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 1: the anchor-plus-uniform group law is exact.

std::string sampler_exactness() {
    const std::vector<double> entries{1.0, 2.0, 3.0, 5.0};
    double analytic_sup = 0.0;
    std::size_t vectors = 0;

    for (std::size_t len = 1; len <= 6; ++len) {
        std::vector<std::size_t> pick(len, 0);
        for (;;) {
            std::vector<double> w(len);
            for (std::size_t i = 0; i < len; ++i) w[i] = entries[pick[i]];
            ++vectors;
            const auto state = SimState::from_weights(w);
            const double s_direct = std::accumulate(w.begin(), w.end(), 0.0);
            for (std::size_t k = 1; k <= std::min<std::size_t>(3, len); ++k) {
                const double groups_with_member = binom(len - 1, k - 1);
                double prob_sum = 0.0;
                std::vector<std::uint32_t> cur;
                enumerate_sets(len, k, cur, 0, [&](const std::vector<std::uint32_t>& set) {
                    double brute_w = 0.0;
                    double decomposed = 0.0;
                    for (auto i : set) {
                        brute_w += w[i];
                        decomposed += state.weight(i) / state.total() / groups_with_member;
                    }
                    const double brute = brute_w / (groups_with_member * s_direct);
                    analytic_sup = std::max(analytic_sup, std::abs(brute - decomposed));
                    prob_sum += brute;
                });
                analytic_sup = std::max(analytic_sup, std::abs(prob_sum - 1.0));
            }
            std::size_t d = 0;
            while (d < len && ++pick[d] == entries.size()) pick[d++] = 0;
            if (d == len) break;
        }
    }
    ensure(analytic_sup <= 1e-12,
           "analytic law deviation " + fmt(analytic_sup) + " exceeds 1e-12");

    // Monte Carlo chi-square on representative states.
    struct Combo {
        std::vector<double> w;
        std::size_t k;
    };
    const std::vector<Combo> combos{
        {{1, 2, 3}, 2},          {{1, 2, 3, 5}, 2}, {{1, 2, 3, 5}, 3},
        {{1, 1, 2, 3, 5, 5}, 3}, {{2, 2, 2}, 2},    {{1, 5}, 1}};
    double min_p = 1.0;
    const std::uint64_t draws = 1'000'000;
    std::uint64_t seed = 1000;
    for (const auto& combo : combos) {
        const auto state = SimState::from_weights(combo.w);
        const std::size_t len = combo.w.size();
        const double s = std::accumulate(combo.w.begin(), combo.w.end(), 0.0);
        const double groups_with_member = binom(len - 1, combo.k - 1);

        std::map<std::vector<std::uint32_t>, double> expected;
        std::vector<std::uint32_t> cur;
        enumerate_sets(len, combo.k, cur, 0, [&](const std::vector<std::uint32_t>& set) {
            double sw = 0.0;
            for (auto i : set) sw += combo.w[i];
            expected[set] = sw / (groups_with_member * s);
        });

        auto rng = RngSet::from_seed(seed++);
        std::map<std::vector<std::uint32_t>, std::uint64_t> observed;
        for (std::uint64_t d = 0; d < draws; ++d) ++observed[sample_group(state, combo.k, rng)];

        double stat = 0.0;
        for (const auto& [set, p] : expected) {
            const double exp_count = p * static_cast<double>(draws);
            const double obs = static_cast<double>(observed[set]);
            stat += (obs - exp_count) * (obs - exp_count) / exp_count;
        }
        for (const auto& [set, c] : observed)
            ensure(expected.count(set) == 1, "sampler produced an impossible set");
        const boost::math::chi_squared chi(static_cast<double>(expected.size() - 1));
        const double p_value = boost::math::cdf(boost::math::complement(chi, stat));
        min_p = std::min(min_p, p_value);
    }
    ensure(min_p > 1e-6, "chi-square p " + fmt(min_p) + " below 1e-6");
    return "analytic sup " + fmt(analytic_sup) + " over " + std::to_string(vectors) +
           " vectors, min chi-square p " + fmt(min_p);
}

// ---------------------------------------------------------------------------
// Criterion 2: inclusion probability formula against brute force and MC.

std::string inclusion_formula_check() {
    const auto state = SimState::from_weights({1.0, 2.0, 3.0});
    const double p = inclusion_probability(state, 2, 2);
    ensure(std::abs(p - 0.75) <= 1e-15, "closed form gave " + fmt(p) + ", expected 0.75");

    auto rng = RngSet::from_seed(2000);
    const std::uint64_t draws = 1'000'000;
    std::uint64_t hits = 0;
    for (std::uint64_t d = 0; d < draws; ++d) {
        const auto g = sample_group(state, 2, rng);
        if (std::find(g.begin(), g.end(), 2u) != g.end()) ++hits;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(draws);
    ensure(std::abs(freq - 0.75) < 0.005,
           "inclusion frequency " + fmt(freq) + " off 0.75 by more than 0.005");
    return "closed form exact, MC frequency " + fmt(freq);
}

// ---------------------------------------------------------------------------
// Criterion 3: the recursion head and a desk-scale simulation.

std::string recursion_head_and_sim() {
    auto cfg = ab_config();
    const auto lim = solve_recursion(cfg, 10);
    const double e1 = std::abs(lim.x[1] - 2.0 / 3.0);
    const double e2 = std::abs(lim.x[2] - 1.0 / 6.0);
    const double e3 = std::abs(lim.x[3] - 1.0 / 15.0);
    ensure(e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12,
           "head errors " + fmt(e1) + "/" + fmt(e2) + "/" + fmt(e3) + " exceed 1e-12");

    cfg.n_steps = 200'000;
    cfg.seed = 31;
    const auto result = run(cfg);
    const auto counts = empirical_weight_counts(result.state, 10);
    double sup = 0.0;
    for (std::size_t j = 1; j <= 10; ++j) sup = std::max(sup, std::abs(counts[j] - lim.x[j]));
    ensure(sup < 0.01, "simulation sup distance " + fmt(sup) + " >= 0.01");
    return "head exact to 1e-12, sim sup " + fmt(sup) + " at n=2e5";
}

// ---------------------------------------------------------------------------
// Criterion 4: decay exponents and the coefficient identities.

std::string discrete_exponent() {
    const auto ab = solve_recursion(ab_config(), 20'000);
    const auto d_ab = doubling_ratio_exponent(ab.x, 1'000, 10'000);
    ensure(std::abs(d_ab.mean - 3.0) <= 0.01 * 3.0,
           "AB doubling exponent " + fmt(d_ab.mean) + " off 3 by more than 1%");

    const auto fb = solve_recursion(full_bonus_nu2_config(), 20'000);
    const auto d_fb = doubling_ratio_exponent(fb.x, 1'000, 10'000);
    ensure(std::abs(d_fb.mean - 4.0) <= 0.02 * 4.0,
           "full-bonus doubling exponent " + fmt(d_fb.mean) + " off 4 by more than 2%");

    for (const auto& cfg : {ab_config(), full_bonus_nu2_config()}) {
        const Moments m = theoretical_moments(cfg);
        std::int64_t max_i = 1;
        for (const auto& [v, p] : y_atoms(cfg)) max_i = std::max(max_i, v);
        const auto dec = coefficient_decomposition(cfg, static_cast<std::size_t>(max_i));
        double sum_ia = 0.0, sum_b = 0.0;
        for (std::size_t i = 1; i < dec.a.size(); ++i) {
            sum_ia += static_cast<double>(i) * dec.a[i];
            sum_b += dec.b[i];
        }
        ensure(std::abs(sum_ia - m.ey / m.p_y_pos) <= 1e-10, "sum i a_i identity failed");
        ensure(std::abs(-sum_b - (m.ex + m.ez + m.ey) / m.p_y_pos) <= 1e-10,
               "sum b_i identity failed");
    }
    return "doubling " + fmt(d_ab.mean) + " vs 3 and " + fmt(d_fb.mean) +
           " vs 4, identities to 1e-10";
}

// ---------------------------------------------------------------------------
// Criterion 5: law of large numbers for the total weight.

std::string total_weight_lln() {
    struct Case {
        ModelConfig cfg;
        const char* name;
    };
    std::vector<Case> cases{{ab_config(), "AB"},
                            {full_bonus_nu2_config(), "full-bonus"},
                            {equal_split_cont_config(), "equal-split-continuous"}};
    double worst = 0.0;
    for (auto& c : cases) {
        c.cfg.n_steps = 100'000;
        c.cfg.seed = 500;
        const Moments m = theoretical_moments(c.cfg);
        RunOptions opts;
        opts.checkpoints = {c.cfg.n_steps};
        for (std::uint64_t r = 0; r < 8; ++r) {
            const auto result = run(c.cfg, opts, r);
            const double ratio =
                result.state.total() / static_cast<double>(c.cfg.n_steps);
            const double rel = std::abs(ratio - (m.ex + m.ez)) / (m.ex + m.ez);
            worst = std::max(worst, rel);
            ensure(rel < 0.02, std::string(c.name) + " replica " + std::to_string(r) +
                                   ": S_n/n off by " + fmt(rel));
        }
    }
    return "worst relative deviation " + fmt(worst) + " over 3 configs x 8 replicas";
}

// ---------------------------------------------------------------------------
// Criterion 6: the integral equation solution and its bracket.

std::string integral_equation_solution() {
    const auto cfg = exp_config();
    const double h = 0.01, t_max = 50.0;
    const auto lim = solve_G(cfg, t_max, h);
    ensure(lim.max_bracket < 0.005, "bracket " + fmt(lim.max_bracket) + " >= 0.005");

    // Re-substitution with the converged quadrature.
    const Moments m = theoretical_moments(cfg);
    const double exz = m.ex + m.ez;
    const std::size_t grid_n = lim.grid.size() - 1;
    std::vector<double> F(grid_n + 1), H(grid_n + 1);
    for (std::size_t i = 0; i <= grid_n; ++i) {
        F[i] = eval_F(cfg, lim.grid[i]);
        H[i] = eval_H(cfg, lim.grid[i]);
    }
    double worst_resid = 0.0;
    for (std::size_t k = 1; k <= grid_n; ++k) {
        const double t = lim.grid[k];
        double upper = 0.0, lower = 0.0;
        for (std::size_t i = 1; i <= k; ++i) {
            const double si = lim.grid[i];
            const double sp = si - h;
            const double dl = std::max(
                (si * F[i] - sp * F[i - 1]) / exz + t * (F[i - 1] - F[i]) / exz +
                    (H[i - 1] - H[i]),
                0.0);
            upper += lim.g[k - i] * dl;
            lower += lim.g[k - i + 1] * dl;
        }
        const double denom = t / exz + m.enu;
        const double tail = H[k] + cfg.x_law.tail(t);
        const double mid = 0.5 * ((upper + tail) + (lower + tail)) / denom;
        const double bracket = std::max((upper - lower) / denom, 1e-15);
        const double resid = std::abs(lim.g[k] - mid);
        worst_resid = std::max(worst_resid, resid / bracket);
        ensure(resid <= bracket, "re-substitution residual " + fmt(resid) +
                                     " outside bracket " + fmt(bracket) + " at t=" + fmt(t));
    }

    ModelConfig sim = cfg;
    sim.n_steps = 100'000;
    sim.seed = 600;
    const auto result = run(sim);
    const std::vector<double> ts{0.5, 1.0, 2.0, 5.0, 10.0};
    const auto emp = empirical_tail_fraction(result.state, ts);
    double sup = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto k = static_cast<std::size_t>(std::llround(ts[i] / h));
        sup = std::max(sup, std::abs(emp[i] - lim.g[k]));
    }
    ensure(sup < 0.02, "simulation sup distance " + fmt(sup) + " >= 0.02");
    return "bracket " + fmt(lim.max_bracket) + ", worst residual/bracket " + fmt(worst_resid) +
           ", sim sup " + fmt(sup);
}

// ---------------------------------------------------------------------------
// Criterion 7: the continuous exponent and coefficient integrals.

std::string continuous_exponent() {
    const auto cfg = exp_config();
    const auto lim = solve_G(cfg, 50.0, 0.01);
    const double slope = log_log_slope(lim.grid, lim.g, 20.0, 40.0);

    const ContinuousCoefficients coef(cfg);
    const double ib = coef.integral_b();
    ensure(std::abs(ib - (-2.0)) <= 1e-6, "integral of b " + fmt(ib) + " not -2 within 1e-6");

    const auto gamma = gamma_continuous(cfg);
    const double rel = std::abs(gamma.ratio_form - gamma.closed_form) / gamma.closed_form;
    ensure(rel <= 1e-6, "gamma forms disagree by " + fmt(rel));

    // For this config the equation has the exact solution G = 4/(t+2)^2,
    // whose own local slope over [20,40] is ~1.87; the solver reproduces
    // it, but the window lies before the asymptotic regime, so the 5%
    // band around 2 cannot be met by any correct solver.
    ensure(std::abs(slope - 2.0) <= 0.05 * 2.0,
           "log slope " + fmt(slope) + " off 2 by more than 5% (exact solution 4/(t+2)^2 has "
           "the same windowed slope; int b " +
               fmt(ib) + " and gamma ratio agreement " + fmt(rel) + " both pass)");
    return "slope " + fmt(slope) + ", int b " + fmt(ib) + ", gamma ratio agreement " + fmt(rel);
}

// ---------------------------------------------------------------------------
// Criterion 8: CLI determinism, byte for byte.

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Fail{"missing output file " + p.string()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string cli_determinism() {
    const char* cli = std::getenv("PAW_CLI");
    ensure(cli != nullptr, "PAW_CLI not set");
    const fs::path dir = fs::temp_directory_path() / "paw_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const fs::path ab = dir / "ab.json";
    {
        std::ofstream out(ab);
        out << R"({
  "mode": "discrete", "seed": 77, "n_steps": 10000,
  "x_law": {"family": "discrete_pmf", "pmf": [[1, 1.0]]},
  "nu_law": {"pmf": [[1, 1.0]]},
  "bonus": {"scheme": "full_bonus", "y_law": {"family": "discrete_pmf", "pmf": [[1, 1.0]]}},
  "solve": {"J": 2000},
  "run": {"replicas": 2}
})";
    }
    const fs::path exp = dir / "exp.json";
    {
        std::ofstream out(exp);
        out << R"({
  "mode": "continuous", "seed": 78, "n_steps": 5000,
  "x_law": {"family": "exponential", "rate": 1.0},
  "nu_law": {"pmf": [[1, 1.0]]},
  "bonus": {"scheme": "full_bonus", "y_law": {"family": "exponential", "rate": 1.0}},
  "solve": {"h": 0.02, "t_max": 5.0},
  "analysis": {"slope_window": [2.0, 4.0]}
})";
    }

    struct Invocation {
        std::string args;
        fs::path config;
        std::vector<std::string> files;
    };
    const std::vector<Invocation> invocations{
        {"simulate", ab, {"snapshots_r0.csv", "snapshots_r1.csv", "ensemble.csv"}},
        {"solve-discrete", ab, {"x.csv", "summary.json"}},
        {"compare", ab, {"report.json", "per_point.csv"}},
        {"solve-continuous", exp, {"G.csv", "summary.json"}},
        {"compare --t-max 12", exp, {"report.json", "per_point.csv"}},
    };
    std::size_t files_checked = 0;
    for (const auto& inv : invocations) {
        const fs::path a = dir / ("a" + std::to_string(files_checked));
        const fs::path b = dir / ("b" + std::to_string(files_checked));
        for (const auto& out : {a, b}) {
            const int rc = run_cli(cli, inv.args + " --config " + inv.config.string() +
                                            " --out " + out.string());
            ensure(rc == 0, inv.args + " exited " + std::to_string(rc));
        }
        for (const auto& f : inv.files) {
            ensure(slurp(a / f) == slurp(b / f), inv.args + ": " + f + " differs between runs");
            ++files_checked;
        }
    }
    return std::to_string(files_checked) + " files byte-identical across repeated runs";
}

}  // namespace

int main() {
    criterion(1, "sampler exactness", sampler_exactness);
    criterion(2, "inclusion probability closed form", inclusion_formula_check);
    criterion(3, "discrete limit head values and simulation", recursion_head_and_sim);
    criterion(4, "discrete decay exponent and identities", discrete_exponent);
    criterion(5, "law of large numbers for S_n", total_weight_lln);
    criterion(6, "integral equation bracket and simulation", integral_equation_solution);
    criterion(7, "continuous decay exponent and integrals", continuous_exponent);
    criterion(8, "CLI determinism", cli_determinism);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
