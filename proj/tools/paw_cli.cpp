// paw: weighted preferential-attachment coauthorship simulator and
// limit-law toolkit. One config file drives every verb; command-line
// overrides support parameter sweeps.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paw/analysis.hpp"
#include "paw/config_io.hpp"
#include "paw/csv.hpp"
#include "paw/engine.hpp"
#include "paw/errors.hpp"
#include "paw/limit_continuous.hpp"
#include "paw/limit_discrete.hpp"
#include "paw/model.hpp"

namespace fs = std::filesystem;
using paw::FullConfig;
using paw::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMissingConfig = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitToleranceExceeded = 4;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> n_steps;
    std::optional<std::uint32_t> replicas;
    std::optional<std::size_t> J;
    std::optional<double> h;
    std::optional<double> t_max;
    std::optional<double> tail_fraction;
    bool dump_weights = false;
};

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void apply_overrides(FullConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.model.seed = *o.seed;
    if (o.n_steps) cfg.model.n_steps = *o.n_steps;
    if (o.replicas) cfg.replicas = *o.replicas;
    if (o.J) cfg.solve.J = *o.J;
    if (o.h) cfg.solve.h = *o.h;
    if (o.t_max) cfg.solve.t_max = *o.t_max;
    if (o.tail_fraction) cfg.analysis.tail_fraction = *o.tail_fraction;
    if (o.dump_weights) cfg.dump_weights = true;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw paw::ConfigError("cannot open output file: " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<paw::RunResult> run_replicas(const FullConfig& cfg, const paw::RunOptions& opts) {
    std::vector<paw::RunResult> results;
    results.reserve(cfg.replicas);
    if (cfg.replicas <= 1) {
        results.push_back(paw::run(cfg.model, opts, 0));
        return results;
    }
    std::vector<std::future<paw::RunResult>> futures;
    futures.reserve(cfg.replicas);
    for (std::uint32_t r = 0; r < cfg.replicas; ++r)
        futures.push_back(std::async(std::launch::async,
                                     [&cfg, &opts, r] { return paw::run(cfg.model, opts, r); }));
    for (auto& f : futures) results.push_back(f.get());
    return results;
}

void write_snapshots(const fs::path& path, const paw::RunResult& result,
                     const std::string& hash, std::uint64_t seed) {
    paw::CsvWriter csv(path.string(), hash, seed, "n,kind,key,value");
    for (const auto& snap : result.snapshots) {
        for (const auto& [j, v] : snap.counts)
            csv.row(snap.n, "count", j, v);
        for (const auto& [t, v] : snap.tails)
            csv.row(snap.n, "tail", paw::format_number(t), v);
    }
}

int cmd_simulate(const FullConfig& cfg, const fs::path& out_dir) {
    paw::require_valid(cfg.model);
    const std::string hash = paw::config_hash(cfg);
    const auto results = run_replicas(cfg, cfg.run);

    if (cfg.replicas <= 1) {
        write_snapshots(out_dir / "snapshots.csv", results[0], hash, cfg.model.seed);
    } else {
        for (std::uint32_t r = 0; r < cfg.replicas; ++r)
            write_snapshots(out_dir / ("snapshots_r" + std::to_string(r) + ".csv"), results[r],
                            hash, cfg.model.seed);
        // Pool the final-checkpoint empirical arrays across replicas.
        if (!results[0].snapshots.empty()) {
            const auto& ref = results[0].snapshots.back();
            std::vector<std::vector<double>> count_rows, tail_rows;
            for (const auto& res : results) {
                const auto& snap = res.snapshots.back();
                std::vector<double> c, t;
                for (const auto& [j, v] : snap.counts) c.push_back(v);
                for (const auto& [x, v] : snap.tails) t.push_back(v);
                count_rows.push_back(std::move(c));
                tail_rows.push_back(std::move(t));
            }
            paw::CsvWriter csv((out_dir / "ensemble.csv").string(), hash, cfg.model.seed,
                               "kind,key,mean,se");
            if (!ref.counts.empty()) {
                const auto agg = paw::aggregate_ensemble(count_rows);
                for (std::size_t i = 0; i < ref.counts.size(); ++i)
                    csv.row("count", ref.counts[i].first, agg.mean[i],
                            agg.stderr_of_mean ? (*agg.stderr_of_mean)[i] : 0.0);
            }
            const auto agg = paw::aggregate_ensemble(tail_rows);
            for (std::size_t i = 0; i < ref.tails.size(); ++i)
                csv.row("tail", paw::format_number(ref.tails[i].first), agg.mean[i],
                        agg.stderr_of_mean ? (*agg.stderr_of_mean)[i] : 0.0);
        }
    }

    if (cfg.dump_weights) {
        paw::CsvWriter csv((out_dir / "weights.csv").string(), hash, cfg.model.seed, "i,weight");
        const auto& w = results[0].state.weights();
        for (std::size_t i = 0; i < w.size(); ++i) csv.row(i, w[i]);
    }

    const paw::Moments m = paw::theoretical_moments(cfg.model);
    std::cout << "simulate: n=" << results[0].state.steps() << " replicas=" << cfg.replicas;
    if (results[0].state.steps() > 0)
        std::cout << " S_n/n="
                  << paw::format_number(results[0].state.total() /
                                        static_cast<double>(results[0].state.steps()));
    std::cout << " EX+EZ=" << paw::format_number(m.ex + m.ez) << "\n";
    return kExitOk;
}

int cmd_solve_discrete(const FullConfig& cfg, const fs::path& out_dir) {
    const std::string hash = paw::config_hash(cfg);
    auto lim = paw::solve_recursion(cfg.model, cfg.solve.J);
    const auto gamma = paw::gamma_discrete(cfg.model);

    std::size_t lo = std::min(cfg.solve.c_window_lo, cfg.solve.J);
    std::size_t hi = std::min(cfg.solve.c_window_hi, cfg.solve.J);
    try {
        lim.c_estimate = paw::tail_constant_estimate(lim, lo, hi);
    } catch (const paw::ConfigError&) {
        // window unusable (zero values); leave the estimate absent
    }

    paw::CsvWriter csv((out_dir / "x.csv").string(), hash, cfg.model.seed, "j,x_j");
    for (std::size_t j = 1; j < lim.x.size(); ++j) csv.row(j, lim.x[j]);

    json summary;
    summary["gamma"] = gamma.closed_form;
    summary["gamma_ratio_form"] = gamma.ratio_form;
    summary["alpha"] = lim.alpha;
    summary["beta"] = lim.beta;
    if (lim.c_estimate) summary["c_estimate"] = *lim.c_estimate;
    summary["window"] = {lo, hi};
    summary["residual_max"] = lim.residual_max;
    summary["J"] = cfg.solve.J;
    summary["config_hash"] = hash;
    summary["seed"] = cfg.model.seed;
    write_json(out_dir / "summary.json", summary);
    std::cout << "solve-discrete: J=" << cfg.solve.J
              << " gamma=" << paw::format_number(gamma.closed_form)
              << " residual_max=" << paw::format_number(lim.residual_max) << "\n";
    return kExitOk;
}

int cmd_solve_continuous(const FullConfig& cfg, const fs::path& out_dir) {
    const std::string hash = paw::config_hash(cfg);
    const auto lim = paw::solve_G(cfg.model, cfg.solve.t_max, cfg.solve.h);
    const auto gamma = paw::gamma_continuous(cfg.model);

    paw::CsvWriter csv((out_dir / "G.csv").string(), hash, cfg.model.seed,
                       "t,G,G_lower,G_upper");
    for (std::size_t k = 0; k < lim.grid.size(); ++k)
        csv.row(lim.grid[k], lim.g[k], lim.g_lower[k], lim.g_upper[k]);

    json summary;
    summary["gamma"] = gamma.closed_form;
    summary["gamma_ratio_form"] = gamma.ratio_form;
    summary["h"] = lim.h;
    summary["t_max"] = lim.t_max;
    summary["max_bracket"] = lim.max_bracket;
    summary["config_hash"] = hash;
    summary["seed"] = cfg.model.seed;
    write_json(out_dir / "summary.json", summary);
    std::cout << "solve-continuous: t_max=" << paw::format_number(lim.t_max)
              << " gamma=" << paw::format_number(gamma.closed_form)
              << " max_bracket=" << paw::format_number(lim.max_bracket) << "\n";
    return kExitOk;
}

double interpolate_grid(const std::vector<double>& grid, const std::vector<double>& values,
                        double t) {
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::lower_bound(grid.begin(), grid.end(), t);
    const std::size_t i1 = static_cast<std::size_t>(it - grid.begin());
    const std::size_t i0 = i1 - 1;
    const double frac = (t - grid[i0]) / (grid[i1] - grid[i0]);
    return values[i0] + frac * (values[i1] - values[i0]);
}

int cmd_compare(const FullConfig& cfg, const fs::path& out_dir) {
    paw::require_valid(cfg.model);
    const std::string hash = paw::config_hash(cfg);

    paw::RunOptions opts = cfg.run;
    opts.checkpoints = {cfg.model.n_steps};
    const auto results = run_replicas(cfg, opts);

    paw::ComparisonReport report;
    std::vector<paw::ExponentEstimate> exponents;

    if (cfg.model.mode == paw::Mode::Discrete) {
        const std::size_t j_max = cfg.analysis.compare_j_max;
        std::vector<std::vector<double>> rows;
        for (const auto& res : results) {
            auto counts = paw::empirical_weight_counts(res.state, j_max);
            rows.emplace_back(counts.begin() + 1, counts.end());
        }
        const auto agg = paw::aggregate_ensemble(rows);

        const std::size_t J =
            std::max({cfg.solve.J, 2 * cfg.analysis.doubling_hi, j_max});
        const auto lim = paw::solve_recursion(cfg.model, J);
        std::vector<double> theo(lim.x.begin() + 1, lim.x.begin() + 1 + j_max);

        std::vector<std::string> keys;
        for (std::size_t j = 1; j <= j_max; ++j) keys.push_back("j=" + std::to_string(j));
        report = paw::build_comparison(std::move(keys), agg.mean, theo,
                                       results[0].state.steps(), cfg.replicas);

        const auto doubling = paw::doubling_ratio_exponent(lim.x, cfg.analysis.doubling_lo,
                                                           cfg.analysis.doubling_hi);
        exponents.push_back({"doubling_ratio(x_j)", doubling.mean,
                             std::to_string(cfg.analysis.doubling_lo) + ".." +
                                 std::to_string(cfg.analysis.doubling_hi)});
        exponents.push_back({"gamma_closed_form", paw::gamma_discrete(cfg.model).value(), ""});
    } else {
        std::vector<std::vector<double>> rows;
        for (const auto& res : results)
            rows.push_back(paw::empirical_tail_fraction(res.state, cfg.analysis.compare_t));
        const auto agg = paw::aggregate_ensemble(rows);

        const double t_need = *std::max_element(cfg.analysis.compare_t.begin(),
                                                cfg.analysis.compare_t.end());
        const double t_max = std::max(cfg.solve.t_max, t_need);
        const auto lim = paw::solve_G(cfg.model, t_max, cfg.solve.h);
        std::vector<double> theo;
        std::vector<std::string> keys;
        for (double t : cfg.analysis.compare_t) {
            theo.push_back(interpolate_grid(lim.grid, lim.g, t));
            keys.push_back("t=" + paw::format_number(t));
        }
        report = paw::build_comparison(std::move(keys), agg.mean, theo,
                                       results[0].state.steps(), cfg.replicas);

        const double slope =
            paw::log_log_slope(lim.grid, lim.g, cfg.analysis.slope_lo, cfg.analysis.slope_hi);
        exponents.push_back({"log_log_slope(G)", slope,
                             short_number(cfg.analysis.slope_lo) + ".." +
                                 short_number(cfg.analysis.slope_hi)});
        exponents.push_back({"gamma_closed_form", paw::gamma_continuous(cfg.model).value(), ""});
    }

    // Hill at the configured fraction plus half and double, so the
    // sensitivity to the cutoff is visible in the report.
    bool any_hill = false;
    for (const double tf :
         {cfg.analysis.tail_fraction / 2.0, cfg.analysis.tail_fraction,
          std::min(2.0 * cfg.analysis.tail_fraction, 0.1)}) {
        try {
            const auto hill = paw::hill_exponent(results[0].state.weights(), tf);
            exponents.push_back({"hill(weights)", hill.value, "top " + short_number(tf)});
            any_hill = true;
        } catch (const paw::ConfigError&) {
            // tiny or degenerate samples have no usable Hill estimate
        }
    }
    if (any_hill)
        exponents.push_back({"hill_target", paw::theoretical_tail_exponent(cfg.model), ""});
    report.exponent_estimates = std::move(exponents);

    paw::CsvWriter csv((out_dir / "per_point.csv").string(), hash, cfg.model.seed,
                       "key,empirical,theoretical,abs_diff");
    for (const auto& p : report.per_point) csv.row(p.key, p.empirical, p.theoretical, p.abs_diff);

    json rep;
    rep["sup_distance"] = report.sup_distance;
    rep["n"] = report.n;
    rep["replicas"] = report.replicas;
    json pts = json::array();
    for (const auto& p : report.per_point) {
        json e;
        e["key"] = p.key;
        e["empirical"] = p.empirical;
        e["theoretical"] = p.theoretical;
        e["abs_diff"] = p.abs_diff;
        pts.push_back(e);
    }
    rep["per_point"] = pts;
    json exps = json::array();
    for (const auto& e : report.exponent_estimates) {
        json x;
        x["method"] = e.method;
        x["value"] = e.value;
        if (!e.window.empty()) x["window"] = e.window;
        exps.push_back(x);
    }
    rep["exponent_estimates"] = exps;
    if (cfg.analysis.sup_tolerance) rep["sup_tolerance"] = *cfg.analysis.sup_tolerance;
    rep["config_hash"] = hash;
    rep["seed"] = cfg.model.seed;
    write_json(out_dir / "report.json", rep);

    std::cout << "compare: n=" << report.n << " replicas=" << report.replicas
              << " sup_distance=" << paw::format_number(report.sup_distance) << "\n";
    if (cfg.analysis.sup_tolerance && report.sup_distance > *cfg.analysis.sup_tolerance) {
        std::cerr << "sup_distance " << paw::format_number(report.sup_distance)
                  << " exceeds tolerance " << paw::format_number(*cfg.analysis.sup_tolerance)
                  << "\n";
        return kExitToleranceExceeded;
    }
    return kExitOk;
}

int cmd_inclusion_check(const std::vector<double>& weights, std::size_t k,
                        std::uint64_t draws, std::uint64_t seed, const fs::path& out_dir) {
    if (weights.size() < 2) throw paw::ConfigError("inclusion-check needs at least 2 weights");
    auto state = paw::SimState::from_weights(weights);
    auto rng = paw::RngSet::from_seed(seed);

    std::vector<std::uint64_t> hits(weights.size(), 0);
    for (std::uint64_t d = 0; d < draws; ++d)
        for (const auto i : paw::sample_group(state, k, rng)) ++hits[i];

    // no config file here; hash the parameters instead
    std::string params = "k=" + std::to_string(k) + ";draws=" + std::to_string(draws);
    for (double w : weights) params += ";" + paw::format_number(w);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : params) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(h));

    paw::CsvWriter csv((out_dir / "inclusion.csv").string(), hash, seed,
                       "index,weight,theoretical,empirical,abs_diff");
    double max_diff = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double theo = paw::inclusion_probability(state, i, k);
        const double emp = static_cast<double>(hits[i]) / static_cast<double>(draws);
        max_diff = std::max(max_diff, std::abs(emp - theo));
        csv.row(i, weights[i], theo, emp, std::abs(emp - theo));
    }
    std::cout << "inclusion-check: k=" << k << " draws=" << draws
              << " max|empirical-theoretical|=" << paw::format_number(max_diff) << "\n";
    return kExitOk;
}

int cmd_validate(const FullConfig& cfg) {
    const auto violations = paw::validate(cfg.model);
    if (violations.empty()) {
        std::cout << "A1-A8 satisfied\n";
        std::cout << "  A1/A3: independence holds by construction of the engine\n";
        std::cout << "  A2/A7: finite moment generating functions (whitelisted families)\n";
        std::cout << "  A4: finite nu support with "
                  << (cfg.model.nu_law.truncation == paw::Truncation::Min ? "min"
                                                                          : "conditional")
                  << " truncation\n";
        std::cout << "  A5: " << paw::scheme_name(cfg.model.bonus.scheme)
                  << " bonuses are conditionally interchangeable\n";
        std::cout << "  A6: EZ = " << paw::format_number(paw::theoretical_moments(cfg.model).ez)
                  << " finite\n";
        std::cout << "  A8: positivity and aperiodicity verified\n";
        return kExitOk;
    }
    std::cout << violations.size() << " violation(s):\n";
    for (const auto& v : violations) std::cout << "  [" << v.code << "] " << v.message << "\n";
    return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted preferential-attachment simulator and limit-law toolkit"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // keep -h free for the grid step

    std::string config_path;
    std::string out_dir = "out";
    Overrides ov;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        sub->set_help_flag("--help", "print help");
        if (needs_config)
            sub->add_option("--config", config_path, "config file (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", ov.seed, "override the config seed");
        sub->add_option("--n-steps", ov.n_steps, "override the number of steps");
        sub->add_option("--replicas", ov.replicas, "override the replica count");
        sub->add_option("--J", ov.J, "override the recursion length");
        sub->add_option("--h", ov.h, "override the grid step");
        sub->add_option("--t-max", ov.t_max, "override the grid end");
        sub->add_option("--tail-fraction", ov.tail_fraction, "override the Hill tail fraction");
    };

    auto* sim = app.add_subcommand("simulate", "run the weight system and dump snapshots");
    add_common(sim, true);
    sim->add_flag("--dump-weights", ov.dump_weights, "also dump the full weight array");

    auto* sd = app.add_subcommand("solve-discrete", "solve the limiting weight recursion");
    add_common(sd, true);

    auto* sc = app.add_subcommand("solve-continuous", "solve the tail integral equation");
    add_common(sc, true);

    auto* cmp = app.add_subcommand("compare", "confront simulation with the solved limit");
    add_common(cmp, true);

    auto* inc = app.add_subcommand("inclusion-check",
                                   "Monte Carlo check of the inclusion probability formula");
    std::vector<double> inc_weights{1.0, 2.0, 3.0};
    std::size_t inc_k = 2;
    std::uint64_t inc_draws = 1'000'000;
    std::uint64_t inc_seed = 1;
    inc->add_option("--weights", inc_weights, "weight vector")->expected(-1);
    inc->add_option("--k", inc_k, "group size");
    inc->add_option("--draws", inc_draws, "number of Monte Carlo draws");
    inc->add_option("--seed", inc_seed, "RNG seed");
    inc->add_option("--out", out_dir, "output directory");

    auto* val = app.add_subcommand("validate", "check the model assumptions");
    add_common(val, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*inc) {
            fs::create_directories(out_dir);
            return cmd_inclusion_check(inc_weights, inc_k, inc_draws, inc_seed, out_dir);
        }

        if (!fs::exists(config_path)) {
            std::cerr << "config file not found: " << config_path << "\n";
            return kExitMissingConfig;
        }
        FullConfig cfg = paw::load_config(config_path);
        apply_overrides(cfg, ov);

        if (*val) return cmd_validate(cfg);

        paw::require_valid(cfg.model);
        fs::create_directories(out_dir);
        if (*sim) return cmd_simulate(cfg, out_dir);
        if (*sd) return cmd_solve_discrete(cfg, out_dir);
        if (*sc) return cmd_solve_continuous(cfg, out_dir);
        if (*cmp) return cmd_compare(cfg, out_dir);
    } catch (const paw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const paw::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
