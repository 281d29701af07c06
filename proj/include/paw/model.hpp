#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "paw/errors.hpp"
#include "paw/rng.hpp"

namespace paw {

enum class Mode { Discrete, Continuous };
enum class Truncation { Min, Conditional };
enum class Scheme { EqualSplit, FullBonus, ExchangeableIid };

/// One weight distribution from the closed whitelist of families. Every
/// member has a finite moment generating function near 0, which is what
/// keeps the limit theory applicable without analytic checks.
struct WeightLaw {
    enum class Family { DiscretePmf, Exponential, Gamma, Uniform, Constant };

    Family family = Family::Constant;
    std::vector<std::pair<std::int64_t, double>> pmf;  // DiscretePmf
    double rate = 0.0;                                 // Exponential
    double shape = 0.0, scale = 0.0;                   // Gamma
    double lo = 0.0, hi = 0.0;                         // Uniform
    double value = 0.0;                                // Constant

    static WeightLaw discrete(std::vector<std::pair<std::int64_t, double>> atoms) {
        WeightLaw w;
        w.family = Family::DiscretePmf;
        std::sort(atoms.begin(), atoms.end());
        w.pmf = std::move(atoms);
        return w;
    }
    static WeightLaw exponential(double rate) {
        WeightLaw w;
        w.family = Family::Exponential;
        w.rate = rate;
        return w;
    }
    static WeightLaw gamma(double shape, double scale) {
        WeightLaw w;
        w.family = Family::Gamma;
        w.shape = shape;
        w.scale = scale;
        return w;
    }
    static WeightLaw uniform(double lo, double hi) {
        WeightLaw w;
        w.family = Family::Uniform;
        w.lo = lo;
        w.hi = hi;
        return w;
    }
    static WeightLaw constant(double v) {
        WeightLaw w;
        w.family = Family::Constant;
        w.value = v;
        return w;
    }

    bool continuous_family() const {
        return family == Family::Exponential || family == Family::Gamma ||
               family == Family::Uniform;
    }

    bool integer_valued() const {
        switch (family) {
            case Family::DiscretePmf: return true;
            case Family::Constant: return value == std::floor(value);
            default: return false;
        }
    }

    double mean() const {
        switch (family) {
            case Family::DiscretePmf: {
                double m = 0.0;
                for (const auto& [v, p] : pmf) m += static_cast<double>(v) * p;
                return m;
            }
            case Family::Exponential: return 1.0 / rate;
            case Family::Gamma: return shape * scale;
            case Family::Uniform: return 0.5 * (lo + hi);
            case Family::Constant: return value;
        }
        return 0.0;
    }

    /// P(V > t), exact per family.
    double tail(double t) const {
        switch (family) {
            case Family::DiscretePmf: {
                double s = 0.0;
                for (const auto& [v, p] : pmf)
                    if (static_cast<double>(v) > t) s += p;
                return s;
            }
            case Family::Exponential: return t <= 0.0 ? 1.0 : std::exp(-rate * t);
            case Family::Gamma:
                return t <= 0.0 ? 1.0 : boost::math::gamma_q(shape, t / scale);
            case Family::Uniform:
                if (t < lo) return 1.0;
                if (t >= hi) return 0.0;
                return (hi - t) / (hi - lo);
            case Family::Constant: return value > t ? 1.0 : 0.0;
        }
        return 0.0;
    }

    /// P(V = v); zero for the continuous families.
    double atom(std::int64_t v) const {
        switch (family) {
            case Family::DiscretePmf: {
                for (const auto& [val, p] : pmf)
                    if (val == v) return p;
                return 0.0;
            }
            case Family::Constant:
                return (value == static_cast<double>(v)) ? 1.0 : 0.0;
            default: return 0.0;
        }
    }

    /// Lebesgue density; defined for the continuous families only.
    double density(double t) const {
        switch (family) {
            case Family::Exponential: return t < 0.0 ? 0.0 : rate * std::exp(-rate * t);
            case Family::Gamma:
                if (t < 0.0) return 0.0;
                if (t == 0.0) return shape > 1.0 ? 0.0 : (shape == 1.0 ? 1.0 / scale : 0.0);
                return std::exp((shape - 1.0) * std::log(t) - t / scale -
                                std::lgamma(shape) - shape * std::log(scale));
            case Family::Uniform: return (t >= lo && t <= hi) ? 1.0 / (hi - lo) : 0.0;
            default:
                throw NumericalError("density requested for a non-continuous family");
        }
    }

    double prob_positive() const { return tail(0.0); }

    /// Smallest T with P(V > T) <= eps.
    double tail_cutoff(double eps) const {
        switch (family) {
            case Family::DiscretePmf:
                return pmf.empty() ? 0.0 : static_cast<double>(pmf.back().first);
            case Family::Exponential: return -std::log(eps) / rate;
            case Family::Gamma: return boost::math::gamma_q_inv(shape, eps) * scale;
            case Family::Uniform: return hi;
            case Family::Constant: return value;
        }
        return 0.0;
    }

    /// Points where the density is not smooth (integration segment ends).
    std::vector<double> density_breakpoints() const {
        switch (family) {
            case Family::Uniform: return {lo, hi};
            case Family::Gamma: return {};  // endpoint behaviour handled at 0
            default: return {};
        }
    }

    double draw(Rng& rng) const {
        switch (family) {
            case Family::DiscretePmf: {
                const double u = rng.next_unit();
                double acc = 0.0;
                for (const auto& [v, p] : pmf) {
                    acc += p;
                    if (u < acc) return static_cast<double>(v);
                }
                return static_cast<double>(pmf.back().first);
            }
            case Family::Exponential: return rng.next_exponential(rate);
            case Family::Gamma: return rng.next_gamma(shape, scale);
            case Family::Uniform: return rng.next_uniform(lo, hi);
            case Family::Constant: return value;
        }
        return 0.0;
    }
};

/// Law of the author count nu: finite pmf on k >= 1 plus the policy used
/// to keep nu_n <= n at small n.
struct AuthorCountLaw {
    std::vector<std::pair<std::uint32_t, double>> pmf;  // sorted by k
    Truncation truncation = Truncation::Min;

    static AuthorCountLaw from_pmf(std::vector<std::pair<std::uint32_t, double>> atoms,
                                   Truncation trunc = Truncation::Min) {
        AuthorCountLaw law;
        std::sort(atoms.begin(), atoms.end());
        law.pmf = std::move(atoms);
        law.truncation = trunc;
        return law;
    }
    static AuthorCountLaw constant(std::uint32_t k, Truncation trunc = Truncation::Min) {
        return from_pmf({{k, 1.0}}, trunc);
    }

    double mean() const {
        double m = 0.0;
        for (const auto& [k, p] : pmf) m += static_cast<double>(k) * p;
        return m;
    }
    double mean_sq() const {
        double m = 0.0;
        for (const auto& [k, p] : pmf) m += static_cast<double>(k) * static_cast<double>(k) * p;
        return m;
    }
    std::uint32_t max_k() const { return pmf.empty() ? 0 : pmf.back().first; }

    /// Draw nu_n for a step whose candidate population has `population`
    /// members. Min: min(nu, population). Conditional: nu given
    /// nu <= population (renormalized inversion; falls back to the
    /// population size if no atom fits).
    std::uint32_t draw_truncated(Rng& rng, std::uint64_t population) const {
        const double u = rng.next_unit();
        if (truncation == Truncation::Min) {
            double acc = 0.0;
            for (const auto& [k, p] : pmf) {
                acc += p;
                if (u < acc) return static_cast<std::uint32_t>(std::min<std::uint64_t>(k, population));
            }
            return static_cast<std::uint32_t>(std::min<std::uint64_t>(max_k(), population));
        }
        double mass = 0.0;
        for (const auto& [k, p] : pmf)
            if (k <= population) mass += p;
        if (mass <= 0.0) return static_cast<std::uint32_t>(population);
        double acc = 0.0;
        std::uint32_t last = static_cast<std::uint32_t>(population);
        for (const auto& [k, p] : pmf) {
            if (k > population) continue;
            acc += p / mass;
            last = k;
            if (u < acc) return k;
        }
        return last;
    }
};

/// How the nth paper's total bonus is split among its authors.
struct BonusScheme {
    Scheme scheme = Scheme::FullBonus;
    WeightLaw law;  // z_law for EqualSplit, y_law otherwise

    static BonusScheme equal_split(WeightLaw z_law) { return {Scheme::EqualSplit, std::move(z_law)}; }
    static BonusScheme full_bonus(WeightLaw y_law) { return {Scheme::FullBonus, std::move(y_law)}; }
    static BonusScheme exchangeable_iid(WeightLaw y_law) {
        return {Scheme::ExchangeableIid, std::move(y_law)};
    }

    /// P(Y > t | nu = k) for the single-author marginal bonus.
    double cond_tail(double t, std::uint32_t k) const {
        if (scheme == Scheme::EqualSplit) return law.tail(static_cast<double>(k) * t);
        return law.tail(t);
    }
    /// P(Y = i | nu = k); discrete laws only.
    double cond_atom(std::int64_t i, std::uint32_t k) const {
        if (scheme == Scheme::EqualSplit) return law.atom(static_cast<std::int64_t>(k) * i);
        return law.atom(i);
    }
    /// Density of Y | nu = k; continuous laws only.
    double cond_density(double s, std::uint32_t k) const {
        if (scheme == Scheme::EqualSplit)
            return static_cast<double>(k) * law.density(static_cast<double>(k) * s);
        return law.density(s);
    }
    double cond_mean(std::uint32_t k) const {
        if (scheme == Scheme::EqualSplit) return law.mean() / static_cast<double>(k);
        return law.mean();
    }
};

/// Full specification of one model instance.
struct ModelConfig {
    WeightLaw x_law;
    AuthorCountLaw nu_law;
    BonusScheme bonus;
    Mode mode = Mode::Discrete;
    std::uint64_t n_steps = 0;
    std::uint64_t seed = 0;
};

struct Violation {
    std::string code;  // "A8", "mode", "law", "nu"
    std::string message;
};

/// Closed form and coefficient-ratio form of a decay exponent; the two
/// must agree, and the solvers verify that they do.
struct GammaForms {
    double closed_form = 0.0;
    double ratio_form = 0.0;
    double value() const { return closed_form; }
};

/// Exact moments of the model plus the recursion constants.
struct Moments {
    double ex = 0.0;
    double ey = 0.0;
    double ez = 0.0;
    double enu = 0.0;
    double enu2 = 0.0;
    double p_y_pos = 0.0;
    double alpha = 0.0;  // P(Y>0) / (EX + EZ)
    double beta = 0.0;   // E((nu - 1) I(Y > 0))
};

namespace detail {

inline void validate_weight_law(const WeightLaw& w, const std::string& name,
                                std::vector<Violation>& out) {
    switch (w.family) {
        case WeightLaw::Family::DiscretePmf: {
            if (w.pmf.empty()) {
                out.push_back({"law", name + ": empty pmf"});
                return;
            }
            double sum = 0.0;
            for (const auto& [v, p] : w.pmf) {
                if (p < 0.0) out.push_back({"law", name + ": negative probability"});
                if (v < 0) out.push_back({"law", name + ": negative support value"});
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                out.push_back({"law", name + ": probabilities sum to " + std::to_string(sum)});
            for (std::size_t i = 1; i < w.pmf.size(); ++i)
                if (w.pmf[i].first == w.pmf[i - 1].first)
                    out.push_back({"law", name + ": duplicate support value"});
            break;
        }
        case WeightLaw::Family::Exponential:
            if (!(w.rate > 0.0)) out.push_back({"law", name + ": rate must be positive"});
            break;
        case WeightLaw::Family::Gamma:
            if (!(w.shape > 0.0)) out.push_back({"law", name + ": shape must be positive"});
            if (!(w.scale > 0.0)) out.push_back({"law", name + ": scale must be positive"});
            break;
        case WeightLaw::Family::Uniform:
            if (!(w.lo >= 0.0)) out.push_back({"law", name + ": lo must be nonnegative"});
            if (!(w.hi > w.lo)) out.push_back({"law", name + ": hi must exceed lo"});
            break;
        case WeightLaw::Family::Constant:
            if (!(w.value > 0.0)) out.push_back({"law", name + ": value must be positive"});
            break;
    }
    if (out.empty() && !(w.prob_positive() > 0.0))
        out.push_back({"A8", "A8: P(" + name + " > 0) = 0"});
}

}  // namespace detail

/// Atoms of an integer-valued law as (value, probability) pairs.
inline std::vector<std::pair<std::int64_t, double>> law_atoms(const WeightLaw& law) {
    if (law.family == WeightLaw::Family::DiscretePmf) return law.pmf;
    if (law.family == WeightLaw::Family::Constant && law.integer_valued())
        return {{static_cast<std::int64_t>(law.value), 1.0}};
    throw ConfigError("law_atoms requires an integer-valued law");
}

/// Marginal atoms of Y (the single-author bonus) in discrete mode,
/// sorted by value and including a possible atom at 0.
inline std::vector<std::pair<std::int64_t, double>> y_atoms(const ModelConfig& cfg) {
    std::map<std::int64_t, double> acc;
    const auto atoms = law_atoms(cfg.bonus.law);
    for (const auto& [k, pk] : cfg.nu_law.pmf) {
        for (const auto& [v, pv] : atoms) {
            const std::int64_t y =
                cfg.bonus.scheme == Scheme::EqualSplit ? v / static_cast<std::int64_t>(k) : v;
            acc[y] += pk * pv;
        }
    }
    return {acc.begin(), acc.end()};
}

/// Checks Assumptions 1-8 plus the mode constraints; returns every
/// violation found (empty means the config is valid).
inline std::vector<Violation> validate(const ModelConfig& cfg) {
    std::vector<Violation> out;
    detail::validate_weight_law(cfg.x_law, "x_law", out);
    detail::validate_weight_law(cfg.bonus.law,
                                cfg.bonus.scheme == Scheme::EqualSplit ? "z_law" : "y_law", out);

    if (cfg.nu_law.pmf.empty()) out.push_back({"nu", "nu_law: empty pmf"});
    double nu_sum = 0.0;
    for (const auto& [k, p] : cfg.nu_law.pmf) {
        if (k < 1) out.push_back({"nu", "nu_n >= 1 required"});
        if (p < 0.0) out.push_back({"nu", "nu_law: negative probability"});
        nu_sum += p;
    }
    if (!cfg.nu_law.pmf.empty() && std::abs(nu_sum - 1.0) > 1e-12)
        out.push_back({"nu", "nu_law: probabilities sum to " + std::to_string(nu_sum)});
    if (!out.empty()) return out;  // later checks assume well-formed laws

    // Initial weights are positive by the model definition.
    if (cfg.x_law.family == WeightLaw::Family::DiscretePmf && cfg.x_law.atom(0) > 0.0)
        out.push_back({"law", "x_law: P(X = 0) > 0; initial weights must be positive"});

    if (cfg.mode == Mode::Discrete) {
        if (!cfg.x_law.integer_valued())
            out.push_back({"mode", "discrete mode requires an integer-valued x_law"});
        if (!cfg.bonus.law.integer_valued())
            out.push_back({"mode", "discrete mode requires an integer-valued bonus law"});
        if (cfg.bonus.scheme == Scheme::EqualSplit && cfg.bonus.law.integer_valued()) {
            const auto z_atoms = law_atoms(cfg.bonus.law);
            for (const auto& [z, pz] : z_atoms) {
                if (pz <= 0.0) continue;
                for (const auto& [k, pk] : cfg.nu_law.pmf) {
                    if (pk <= 0.0) continue;
                    if (z % static_cast<std::int64_t>(k) != 0) {
                        std::ostringstream msg;
                        msg << "equal split in discrete mode requires Z/k integer (Z=" << z
                            << ", k=" << k << ")";
                        out.push_back({"mode", msg.str()});
                    }
                }
            }
        }
        if (out.empty()) {
            // A8: the positive part of the Y support must not be periodic.
            const auto atoms = y_atoms(cfg);
            std::int64_t g = 0;
            double pos_mass = 0.0;
            for (const auto& [i, p] : atoms) {
                if (i <= 0 || p <= 0.0) continue;
                g = std::gcd(g, i);
                pos_mass += p;
            }
            if (pos_mass <= 0.0)
                out.push_back({"A8", "A8: P(Y > 0) = 0"});
            else if (g != 1)
                out.push_back({"A8", "A8: gcd of Y support is " + std::to_string(g)});
        }
    } else {
        if (!cfg.x_law.continuous_family())
            out.push_back({"mode", "continuous mode requires a continuous x_law"});
        if (!cfg.bonus.law.continuous_family())
            out.push_back({"mode", "continuous mode requires a continuous bonus law"});
    }
    return out;
}

inline void require_valid(const ModelConfig& cfg) {
    const auto violations = validate(cfg);
    if (violations.empty()) return;
    std::string msg = "invalid model config:";
    for (const auto& v : violations) msg += "\n  [" + v.code + "] " + v.message;
    throw ConfigError(msg);
}

/// All moments computed by conditioning on the author count.
inline Moments theoretical_moments(const ModelConfig& cfg) {
    Moments m;
    m.ex = cfg.x_law.mean();
    m.enu = cfg.nu_law.mean();
    m.enu2 = cfg.nu_law.mean_sq();
    for (const auto& [k, pk] : cfg.nu_law.pmf) {
        const double ey_k = cfg.bonus.scheme == Scheme::EqualSplit
                                ? cfg.bonus.law.mean() / static_cast<double>(k)
                                : cfg.bonus.law.mean();
        const double p_pos_k = cfg.bonus.law.prob_positive();  // same for Z/k and Y
        m.ey += pk * ey_k;
        m.ez += pk * static_cast<double>(k) * ey_k;  // Z | k has mean k E(Y | k)
        m.p_y_pos += pk * p_pos_k;
        m.beta += pk * (static_cast<double>(k) - 1.0) * p_pos_k;
    }
    m.alpha = m.p_y_pos / (m.ex + m.ez);
    return m;
}

/// F(t) = P(Y > t) for the marginal single-author bonus.
inline double eval_F(const ModelConfig& cfg, double t) {
    double s = 0.0;
    for (const auto& [k, pk] : cfg.nu_law.pmf) s += pk * cfg.bonus.cond_tail(t, k);
    return s;
}

/// H(t) = E((nu - 1) I(Y > t)).
inline double eval_H(const ModelConfig& cfg, double t) {
    double s = 0.0;
    for (const auto& [k, pk] : cfg.nu_law.pmf)
        s += pk * (static_cast<double>(k) - 1.0) * cfg.bonus.cond_tail(t, k);
    return s;
}

/// H(i) = E((nu - 1) I(Y = i)), i >= 1. Discrete mode only.
inline double eval_H_atom(const ModelConfig& cfg, std::int64_t i) {
    if (cfg.mode != Mode::Discrete)
        throw ConfigError("eval_H_atom is defined in discrete mode only");
    if (i < 1) throw ConfigError("eval_H_atom requires i >= 1");
    double s = 0.0;
    for (const auto& [k, pk] : cfg.nu_law.pmf)
        s += pk * (static_cast<double>(k) - 1.0) * cfg.bonus.cond_atom(i, k);
    return s;
}

/// Marginal density of Y in continuous mode (mixture over the nu support).
inline double y_density(const ModelConfig& cfg, double s) {
    double f = 0.0;
    for (const auto& [k, pk] : cfg.nu_law.pmf) f += pk * cfg.bonus.cond_density(s, k);
    return f;
}

/// Density of -dH: h(s) with H(t) = int_t^inf h.
inline double h_density(const ModelConfig& cfg, double s) {
    double f = 0.0;
    for (const auto& [k, pk] : cfg.nu_law.pmf)
        f += pk * (static_cast<double>(k) - 1.0) * cfg.bonus.cond_density(s, k);
    return f;
}

/// Points where the marginal Y density is not smooth, plus the scaled
/// copies induced by equal splitting.
inline std::vector<double> y_density_breakpoints(const ModelConfig& cfg) {
    std::vector<double> pts;
    for (const auto& bp : cfg.bonus.law.density_breakpoints()) {
        if (cfg.bonus.scheme == Scheme::EqualSplit) {
            for (const auto& [k, pk] : cfg.nu_law.pmf)
                pts.push_back(bp / static_cast<double>(k));
        } else {
            pts.push_back(bp);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// Smallest T beyond which both F and H are below eps.
inline double y_tail_cutoff(const ModelConfig& cfg, double eps) {
    // F(t) <= tail of the slowest component; bound via the unscaled law.
    double cutoff = cfg.bonus.law.tail_cutoff(eps);
    if (cfg.bonus.scheme == Scheme::EqualSplit) {
        // Y | k = Z/k, so the k = min support stretches least.
        const double kmin = static_cast<double>(cfg.nu_law.pmf.front().first);
        cutoff /= kmin;
    }
    return cutoff;
}

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::EqualSplit: return "equal_split";
        case Scheme::FullBonus: return "full_bonus";
        case Scheme::ExchangeableIid: return "exchangeable_iid";
    }
    return "?";
}

}  // namespace paw
