#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "paw/errors.hpp"
#include "paw/model.hpp"

namespace paw {

/// Solution of the limiting weight recursion
///   x_j = [ sum_{i<j} x_{j-i} ((j-i) P(Y=i)/(EX+EZ) + H(i)) + P(X=j) ]
///         / (alpha j + beta + 1)
/// together with the decay exponent gamma = (EX+EZ)/EY + 1.
struct DiscreteLimit {
    std::vector<double> x;      // x[j] for j = 0..J, x[0] = 0
    std::vector<double> log_x;  // log x_j, -inf where x_j = 0
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::optional<double> c_estimate;
    double residual_max = 0.0;  // max re-substitution residual over j
};

/// The recursion weights split as w_{j,i} = a_i + b_i/j + c_{j,i}.
struct CoefficientDecomposition {
    std::vector<double> a;  // a[i] = P(Y=i | Y>0), i = 0..I (a[0] unused)
    std::vector<double> b;  // b[i] = (H(i) - (alpha i + beta + 1) a_i)/alpha
    std::vector<double> r;  // r[j] = P(X=j)/(alpha j + beta + 1), j = 0..I
    double alpha = 0.0;
    double beta = 0.0;

    double c(std::uint64_t j, std::uint64_t i) const {
        const double jd = static_cast<double>(j);
        return -b[i] * (beta + 1.0) / (jd * (alpha * jd + beta + 1.0));
    }
    double w(std::uint64_t j, std::uint64_t i) const {
        return a[i] + b[i] / static_cast<double>(j) + c(j, i);
    }
};

namespace detail {

struct RecursionAtoms {
    std::vector<std::pair<std::int64_t, double>> y;  // positive Y atoms (i, P(Y=i))
    std::vector<double> h;                           // H(i) aligned with y
};

inline RecursionAtoms recursion_atoms(const ModelConfig& cfg) {
    RecursionAtoms out;
    for (const auto& [i, p] : y_atoms(cfg)) {
        if (i <= 0) continue;
        out.y.emplace_back(i, p);
        out.h.push_back(eval_H_atom(cfg, i));
    }
    return out;
}

}  // namespace detail

/// Forward substitution of the recursion for j = 1..J. All numerator
/// terms are nonnegative, so the loop is cancellation-free; once values
/// pass below the underflow guard the tail is continued in log space.
inline DiscreteLimit solve_recursion(const ModelConfig& cfg, std::size_t J) {
    require_valid(cfg);
    if (cfg.mode != Mode::Discrete)
        throw ConfigError("solve_recursion requires a discrete-mode config");
    if (J < 1) throw ConfigError("J >= 1 required");

    const Moments m = theoretical_moments(cfg);
    const double exz = m.ex + m.ez;
    const auto atoms = detail::recursion_atoms(cfg);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    constexpr double kUnderflow = 1e-280;

    DiscreteLimit lim;
    lim.alpha = m.alpha;
    lim.beta = m.beta;
    lim.gamma = exz / m.ey + 1.0;
    lim.x.assign(J + 1, 0.0);
    lim.log_x.assign(J + 1, neg_inf);

    bool log_mode = false;
    std::vector<double> terms;  // scratch for the log-space accumulation
    for (std::size_t j = 1; j <= J; ++j) {
        const double jd = static_cast<double>(j);
        const double denom = m.alpha * jd + m.beta + 1.0;
        const double px = cfg.x_law.atom(static_cast<std::int64_t>(j));
        if (!log_mode) {
            double num = px;
            for (std::size_t a = 0; a < atoms.y.size(); ++a) {
                const auto i = static_cast<std::size_t>(atoms.y[a].first);
                if (i >= j) break;
                const double w = (jd - static_cast<double>(i)) * atoms.y[a].second / exz +
                                 atoms.h[a];
                num += lim.x[j - i] * w;
            }
            const double xj = num / denom;
            lim.x[j] = xj;
            lim.log_x[j] = xj > 0.0 ? std::log(xj) : neg_inf;
            if (xj > 0.0 && xj < kUnderflow) log_mode = true;
            continue;
        }
        terms.clear();
        if (px > 0.0) terms.push_back(std::log(px));
        for (std::size_t a = 0; a < atoms.y.size(); ++a) {
            const auto i = static_cast<std::size_t>(atoms.y[a].first);
            if (i >= j) break;
            if (lim.log_x[j - i] == neg_inf) continue;
            const double w =
                (jd - static_cast<double>(i)) * atoms.y[a].second / exz + atoms.h[a];
            if (w > 0.0) terms.push_back(lim.log_x[j - i] + std::log(w));
        }
        if (terms.empty()) continue;
        const double peak = *std::max_element(terms.begin(), terms.end());
        double s = 0.0;
        for (double t : terms) s += std::exp(t - peak);
        lim.log_x[j] = peak + std::log(s) - std::log(denom);
        lim.x[j] = std::exp(lim.log_x[j]);
    }

    // Re-substitution residual (linear range only; log-space tail is exact
    // up to rounding by construction).
    for (std::size_t j = 1; j <= J; ++j) {
        if (lim.x[j] == 0.0 || lim.x[j] < kUnderflow) continue;
        const double jd = static_cast<double>(j);
        double num = cfg.x_law.atom(static_cast<std::int64_t>(j));
        for (std::size_t a = 0; a < atoms.y.size(); ++a) {
            const auto i = static_cast<std::size_t>(atoms.y[a].first);
            if (i >= j) break;
            num += lim.x[j - i] *
                   ((jd - static_cast<double>(i)) * atoms.y[a].second / exz + atoms.h[a]);
        }
        const double resid = std::abs(lim.x[j] * (m.alpha * jd + m.beta + 1.0) - num) /
                             std::max(num, std::numeric_limits<double>::min());
        lim.residual_max = std::max(lim.residual_max, resid);
    }
    return lim;
}

/// a_i, b_i, r_j of the decomposition for i, j = 1..I.
inline CoefficientDecomposition coefficient_decomposition(const ModelConfig& cfg,
                                                          std::size_t I) {
    require_valid(cfg);
    if (cfg.mode != Mode::Discrete)
        throw ConfigError("coefficient_decomposition requires a discrete-mode config");
    const Moments m = theoretical_moments(cfg);
    CoefficientDecomposition d;
    d.alpha = m.alpha;
    d.beta = m.beta;
    d.a.assign(I + 1, 0.0);
    d.b.assign(I + 1, 0.0);
    d.r.assign(I + 1, 0.0);
    std::vector<double> py(I + 1, 0.0);
    for (const auto& [v, p] : y_atoms(cfg))
        if (v >= 1 && v <= static_cast<std::int64_t>(I)) py[static_cast<std::size_t>(v)] = p;
    for (std::size_t i = 1; i <= I; ++i) {
        d.a[i] = py[i] / (m.alpha * (m.ex + m.ez));  // = P(Y=i | Y>0)
        const double h = eval_H_atom(cfg, static_cast<std::int64_t>(i));
        d.b[i] = (h - (m.alpha * static_cast<double>(i) + m.beta + 1.0) * d.a[i]) / m.alpha;
        d.r[i] = cfg.x_law.atom(static_cast<std::int64_t>(i)) /
                 (m.alpha * static_cast<double>(i) + m.beta + 1.0);
    }
    return d;
}

/// gamma = (EX+EZ)/EY + 1, cross-checked against -sum b_i / sum i a_i.
inline GammaForms gamma_discrete(const ModelConfig& cfg) {
    require_valid(cfg);
    if (cfg.mode != Mode::Discrete)
        throw ConfigError("gamma_discrete requires a discrete-mode config");
    const Moments m = theoretical_moments(cfg);
    GammaForms g;
    g.closed_form = (m.ex + m.ez) / m.ey + 1.0;

    // The sums are finite: both a and b vanish off the Y support.
    std::int64_t max_i = 1;
    for (const auto& [v, p] : y_atoms(cfg)) max_i = std::max(max_i, v);
    const auto d = coefficient_decomposition(cfg, static_cast<std::size_t>(max_i));
    double sum_b = 0.0, sum_ia = 0.0;
    for (std::size_t i = 1; i < d.a.size(); ++i) {
        sum_b += d.b[i];
        sum_ia += static_cast<double>(i) * d.a[i];
    }
    g.ratio_form = -sum_b / sum_ia;
    if (std::abs(g.ratio_form - g.closed_form) > 1e-10) {
        std::ostringstream msg;
        msg << "gamma forms disagree: closed=" << g.closed_form << " ratio=" << g.ratio_form;
        throw NumericalError(msg.str());
    }
    return g;
}

/// Least-squares estimate of C in x_j ~ C j^{-gamma} over a window, with
/// gamma held fixed: exp(mean(log x_j + gamma log j)). A numerical
/// estimate only; there is no closed form for C.
inline double tail_constant_estimate(const DiscreteLimit& lim, std::size_t j_lo,
                                     std::size_t j_hi) {
    if (j_lo < 1 || j_hi >= lim.x.size() || j_lo > j_hi)
        throw ConfigError("tail constant window out of range");
    double acc = 0.0;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
        if (!(lim.log_x[j] > -std::numeric_limits<double>::infinity()))
            throw ConfigError("tail constant window contains x_j = 0");
        acc += lim.log_x[j] + lim.gamma * std::log(static_cast<double>(j));
    }
    return std::exp(acc / static_cast<double>(j_hi - j_lo + 1));
}

}  // namespace paw
