#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paw/errors.hpp"
#include "paw/model.hpp"

namespace paw {

/// Max absolute pointwise difference between two aligned arrays.
inline double sup_distance(std::span<const double> empirical,
                           std::span<const double> theoretical) {
    if (empirical.size() != theoretical.size())
        throw ConfigError("sup_distance requires equal-length arrays");
    double d = 0.0;
    for (std::size_t i = 0; i < empirical.size(); ++i)
        d = std::max(d, std::abs(empirical[i] - theoretical[i]));
    return d;
}

struct DoublingEstimate {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Estimate of the decay exponent from -log2(v_{2j}/v_j) averaged over
/// j in [j_lo, j_hi]. values is indexed so that values[j] is v_j
/// (entry 0 unused). Scale-invariant: constants cancel in the ratio.
inline DoublingEstimate doubling_ratio_exponent(std::span<const double> values,
                                                std::size_t j_lo, std::size_t j_hi) {
    if (j_lo < 1 || j_lo > j_hi || 2 * j_hi >= values.size())
        throw ConfigError("doubling window out of range");
    double sum = 0.0, sum_sq = 0.0;
    const double count = static_cast<double>(j_hi - j_lo + 1);
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
        if (!(values[j] > 0.0) || !(values[2 * j] > 0.0))
            throw ConfigError("doubling window contains nonpositive values");
        const double e = -std::log2(values[2 * j] / values[j]);
        sum += e;
        sum_sq += e * e;
    }
    DoublingEstimate out;
    out.mean = sum / count;
    out.stddev = count > 1.0 ? std::sqrt(std::max(0.0, sum_sq / count - out.mean * out.mean))
                             : 0.0;
    return out;
}

/// Least-squares slope of log v against log t over grid points with
/// t in [t_lo, t_hi]; returns the decay exponent (negated slope).
inline double log_log_slope(std::span<const double> grid, std::span<const double> values,
                            double t_lo, double t_hi) {
    if (grid.size() != values.size()) throw ConfigError("grid/value length mismatch");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < t_lo || grid[i] > t_hi) continue;
        if (!(grid[i] > 0.0) || !(values[i] > 0.0))
            throw ConfigError("log-log window contains nonpositive values");
        const double x = std::log(grid[i]);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw ConfigError("log-log window contains fewer than two grid points");
    const double nd = static_cast<double>(n);
    const double slope = (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
    return -slope;
}

struct HillEstimate {
    double value = 0.0;
    std::size_t order_statistics = 0;  // number of top order statistics used
};

/// Hill tail-index estimate on the top tail_fraction order statistics.
inline HillEstimate hill_exponent(std::span<const double> weights, double tail_fraction) {
    if (weights.size() < 100) throw ConfigError("hill_exponent requires at least 100 samples");
    if (!(tail_fraction > 0.0) || tail_fraction > 0.1)
        throw ConfigError("tail_fraction must lie in (0, 0.1]");
    std::vector<double> sorted(weights.begin(), weights.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto m = static_cast<std::size_t>(
        std::max<double>(1.0, std::floor(tail_fraction * static_cast<double>(sorted.size()))));
    const double x_m = sorted[m];  // (m+1)-th largest
    if (!(x_m > 0.0)) throw ConfigError("hill_exponent requires positive samples");
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += std::log(sorted[i] / x_m);
    if (acc <= 0.0) throw ConfigError("degenerate sample: all tail values equal");
    return {static_cast<double>(m) / acc, m};
}

/// Tail exponent the Hill estimate should match: gamma - 1 in discrete
/// mode (pmf exponent gamma), gamma in continuous mode (G is already a
/// tail function).
inline double theoretical_tail_exponent(const ModelConfig& cfg) {
    const Moments m = theoretical_moments(cfg);
    const double ratio = (m.ex + m.ez) / m.ey;
    // The discrete gamma is a pmf exponent, ratio + 1; its tail exponent
    // is gamma - 1. The continuous gamma is already a tail exponent.
    if (cfg.mode == Mode::Discrete) return (ratio + 1.0) - 1.0;
    return ratio;
}

struct EnsembleSummary {
    std::vector<double> mean;
    std::optional<std::vector<double>> stderr_of_mean;  // absent for one replica
};

/// Pointwise mean and standard error across replicas. The merge is a
/// plain sum, so it is associative, commutative and order-independent.
inline EnsembleSummary aggregate_ensemble(const std::vector<std::vector<double>>& replicas) {
    if (replicas.empty()) throw ConfigError("aggregate_ensemble requires at least one replica");
    const std::size_t len = replicas.front().size();
    for (const auto& r : replicas)
        if (r.size() != len) throw ConfigError("replica grids do not match");

    EnsembleSummary out;
    out.mean.assign(len, 0.0);
    for (const auto& r : replicas)
        for (std::size_t i = 0; i < len; ++i) out.mean[i] += r[i];
    const double n = static_cast<double>(replicas.size());
    for (auto& v : out.mean) v /= n;

    if (replicas.size() > 1) {
        std::vector<double> se(len, 0.0);
        for (const auto& r : replicas)
            for (std::size_t i = 0; i < len; ++i) {
                const double d = r[i] - out.mean[i];
                se[i] += d * d;
            }
        for (auto& v : se) v = std::sqrt(v / (n - 1.0) / n);
        out.stderr_of_mean = std::move(se);
    }
    return out;
}

struct ExponentEstimate {
    std::string method;
    double value = 0.0;
    std::string window;
};

struct ComparisonPoint {
    std::string key;
    double empirical = 0.0;
    double theoretical = 0.0;
    double abs_diff = 0.0;
};

/// Confrontation of an empirical distribution with its theoretical limit.
struct ComparisonReport {
    double sup_distance = 0.0;
    std::vector<ComparisonPoint> per_point;
    std::uint64_t n = 0;
    std::uint32_t replicas = 1;
    std::vector<ExponentEstimate> exponent_estimates;
};

inline ComparisonReport build_comparison(std::vector<std::string> keys,
                                         std::span<const double> empirical,
                                         std::span<const double> theoretical,
                                         std::uint64_t n, std::uint32_t replicas) {
    if (keys.size() != empirical.size() || empirical.size() != theoretical.size())
        throw ConfigError("comparison arrays must have equal length");
    ComparisonReport rep;
    rep.n = n;
    rep.replicas = replicas;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const double d = std::abs(empirical[i] - theoretical[i]);
        rep.per_point.push_back({std::move(keys[i]), empirical[i], theoretical[i], d});
        rep.sup_distance = std::max(rep.sup_distance, d);
    }
    return rep;
}

}  // namespace paw
