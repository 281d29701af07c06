#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "paw/errors.hpp"
#include "paw/model.hpp"
#include "paw/prefix_sum.hpp"
#include "paw/rng.hpp"

namespace paw {

/// Weight system after n steps: weights W(n,0..n), a prefix-sum index
/// over them for O(log n) weight-proportional search, and the running
/// total S_n. In integer mode the total is additionally carried as an
/// exact 64-bit integer.
class SimState {
public:
    static SimState from_weights(std::vector<double> weights, bool integer_mode = false) {
        SimState s;
        s.integer_mode_ = integer_mode;
        for (double w : weights) s.append_weight(w);
        s.n_ = weights.empty() ? 0 : weights.size() - 1;
        return s;
    }

    std::uint64_t steps() const { return n_; }
    std::size_t population() const { return weights_.size(); }
    double total() const { return total_.value(); }
    std::int64_t total_int() const { return total_int_; }
    bool integer_mode() const { return integer_mode_; }
    const std::vector<double>& weights() const { return weights_; }
    double weight(std::size_t i) const { return weights_[i]; }
    const PrefixSumIndex<double>& index() const { return index_; }

    void append_weight(double w) {
        weights_.push_back(w);
        index_.push_back(w);
        total_.add(w);
        if (integer_mode_) add_int(w);
    }

    void add_bonus(std::size_t i, double b) {
        weights_[i] += b;
        index_.add(i, b);
        total_.add(b);
        if (integer_mode_) add_int(b);
    }

    void bump_steps() { ++n_; }

private:
    void add_int(double v) {
        const auto iv = static_cast<std::int64_t>(std::llround(v));
        if (total_int_ > std::numeric_limits<std::int64_t>::max() - iv)
            throw NumericalError("integer total overflow");
        total_int_ += iv;
    }

    std::vector<double> weights_;
    PrefixSumIndex<double> index_;
    CompensatedSum total_;
    std::int64_t total_int_ = 0;
    std::uint64_t n_ = 0;
    bool integer_mode_ = false;
};

/// What one step drew: author count, the chosen group in label order,
/// their bonuses in the same order, and the newcomer's initial weight.
struct StepRecord {
    std::uint32_t k = 0;
    std::vector<std::uint32_t> group;
    std::vector<double> bonuses;
    double new_weight = 0.0;
};

inline SimState init_state(const ModelConfig& cfg, RngSet& rng) {
    SimState s = SimState::from_weights({}, cfg.mode == Mode::Discrete);
    double x;
    do {
        x = cfg.x_law.draw(rng.initial_weight);
    } while (x <= 0.0);
    s.append_weight(x);
    return s;
}

/// Probability that researcher i participates in the next paper given it
/// has k authors: (k-1)/n (1 - W/S) + W/S on a population of n+1.
inline double inclusion_probability(const SimState& state, std::size_t i, std::size_t k) {
    const std::size_t p = state.population();
    if (k < 1 || k > p) throw ConfigError("group size k out of range");
    if (i >= p) throw ConfigError("researcher index out of range");
    if (k == p) return 1.0;
    const double ws = state.weight(i) / state.total();
    const double n = static_cast<double>(p - 1);
    return (static_cast<double>(k) - 1.0) / n * (1.0 - ws) + ws;
}

/// Draws a k-set H with P(H) proportional to its total weight: one anchor
/// index proportional to weight, then k-1 uniform without replacement
/// from the rest. Each set is reached through any of its members as
/// anchor, so P(H) = sum_{j in H} W_j / (C(n, k-1) S_n) exactly.
/// Returned indices are sorted (label order).
inline std::vector<std::uint32_t> sample_group(const SimState& state, std::size_t k,
                                               RngSet& rng) {
    const std::size_t p = state.population();
    if (k < 1 || k > p) throw ConfigError("group size k out of range");
    std::vector<std::uint32_t> group;
    group.reserve(k);
    if (k == p) {
        for (std::size_t i = 0; i < p; ++i) group.push_back(static_cast<std::uint32_t>(i));
        return group;
    }

    const double target = rng.anchor.next_unit() * state.total();
    const std::size_t anchor = state.index().find_prefix(target);
    group.push_back(static_cast<std::uint32_t>(anchor));

    // Partial Fisher-Yates over the virtual array {0..p-1} \ {anchor};
    // only the touched slots are materialized.
    const std::size_t m = p - 1;
    std::map<std::size_t, std::size_t> swapped;
    auto value_at = [&](std::size_t slot) {
        const auto it = swapped.find(slot);
        const std::size_t v = it == swapped.end() ? slot : it->second;
        return v < anchor ? v : v + 1;  // skip the anchor label
    };
    auto raw_at = [&](std::size_t slot) {
        const auto it = swapped.find(slot);
        return it == swapped.end() ? slot : it->second;
    };
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const std::size_t r = j + static_cast<std::size_t>(rng.uniform_set.next_below(m - j));
        group.push_back(static_cast<std::uint32_t>(value_at(r)));
        swapped[r] = raw_at(j);
    }
    std::sort(group.begin(), group.end());
    return group;
}

/// Advance the system by one step: draw nu, pick the group, hand out
/// bonuses in label order, append the newcomer.
inline StepRecord step(SimState& state, const ModelConfig& cfg, RngSet& rng) {
    StepRecord rec;
    rec.k = cfg.nu_law.draw_truncated(rng.author_count, state.population());
    rec.group = sample_group(state, rec.k, rng);

    rec.bonuses.resize(rec.k);
    switch (cfg.bonus.scheme) {
        case Scheme::EqualSplit: {
            const double z = cfg.bonus.law.draw(rng.bonus);
            const double share = z / static_cast<double>(rec.k);
            std::fill(rec.bonuses.begin(), rec.bonuses.end(), share);
            break;
        }
        case Scheme::FullBonus: {
            const double y = cfg.bonus.law.draw(rng.bonus);
            std::fill(rec.bonuses.begin(), rec.bonuses.end(), y);
            break;
        }
        case Scheme::ExchangeableIid:
            for (auto& b : rec.bonuses) b = cfg.bonus.law.draw(rng.bonus);
            break;
    }
    for (std::size_t j = 0; j < rec.k; ++j)
        if (rec.bonuses[j] != 0.0) state.add_bonus(rec.group[j], rec.bonuses[j]);

    do {
        rec.new_weight = cfg.x_law.draw(rng.initial_weight);
    } while (rec.new_weight <= 0.0);
    state.append_weight(rec.new_weight);
    state.bump_steps();
    return rec;
}

/// Empirical weight pmf: entry j = xi_n(j) / n for j = 0..j_max.
/// Discrete mode, n >= 1.
inline std::vector<double> empirical_weight_counts(const SimState& state, std::size_t j_max) {
    if (state.steps() == 0) throw ConfigError("empirical_weight_counts requires n >= 1");
    std::vector<double> counts(j_max + 1, 0.0);
    for (double w : state.weights()) {
        const auto j = static_cast<std::int64_t>(std::llround(w));
        if (std::abs(w - static_cast<double>(j)) > 1e-9)
            throw NumericalError("non-integer weight in discrete mode");
        if (j >= 0 && static_cast<std::size_t>(j) <= j_max)
            counts[static_cast<std::size_t>(j)] += 1.0;
    }
    const double n = static_cast<double>(state.steps());
    for (auto& c : counts) c /= n;
    return counts;
}

/// Empirical tail: entry l = |{i : W(n,i) > grid[l]}| / n. One sort per call.
inline std::vector<double> empirical_tail_fraction(const SimState& state,
                                                   std::span<const double> grid) {
    if (state.steps() == 0) throw ConfigError("empirical_tail_fraction requires n >= 1");
    for (std::size_t l = 1; l < grid.size(); ++l)
        if (!(grid[l] > grid[l - 1])) throw ConfigError("tail grid must be increasing");
    std::vector<double> sorted = state.weights();
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(state.steps());
    std::vector<double> out(grid.size());
    for (std::size_t l = 0; l < grid.size(); ++l) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), grid[l]);
        out[l] = static_cast<double>(sorted.end() - it) / n;
    }
    return out;
}

/// Empirical distributions recorded at one checkpoint.
struct Snapshot {
    std::uint64_t n = 0;
    std::vector<std::pair<std::int64_t, double>> counts;  // (j, xi_n(j)/n), discrete mode
    std::vector<std::pair<double, double>> tails;         // (t, xi_n(t)/n)
};

struct RunOptions {
    std::vector<std::uint64_t> checkpoints;  // empty: geometric from 1000 plus the final step
    std::size_t snapshot_j_max = 50;
    std::vector<double> t_grid = {0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
    std::uint64_t max_steps = 50'000'000;  // memory guard
};

struct RunResult {
    SimState state;
    std::vector<Snapshot> snapshots;
};

inline std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t n_steps) {
    std::vector<std::uint64_t> cps;
    for (double e = 3.0;; e += 0.2) {
        const auto n = static_cast<std::uint64_t>(std::llround(std::pow(10.0, e)));
        if (n >= n_steps) break;
        cps.push_back(n);
    }
    if (n_steps > 0) cps.push_back(n_steps);
    return cps;
}

/// Run n_steps steps from a fresh state, recording snapshots at the
/// checkpoints. Deterministic given cfg.seed and replica.
inline RunResult run(const ModelConfig& cfg, const RunOptions& opts = {},
                     std::uint64_t replica = 0) {
    require_valid(cfg);
    if (cfg.n_steps > opts.max_steps) {
        std::ostringstream msg;
        msg << "n_steps=" << cfg.n_steps << " exceeds the memory guard (" << opts.max_steps
            << ")";
        throw ConfigError(msg.str());
    }
    RngSet rng = RngSet::from_seed(cfg.seed, replica);
    RunResult result{init_state(cfg, rng), {}};

    std::vector<std::uint64_t> cps =
        opts.checkpoints.empty() ? geometric_checkpoints(cfg.n_steps) : opts.checkpoints;
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());

    std::size_t next_cp = 0;
    for (std::uint64_t i = 1; i <= cfg.n_steps; ++i) {
        step(result.state, cfg, rng);
        if (next_cp < cps.size() && cps[next_cp] == i) {
            ++next_cp;
            Snapshot snap;
            snap.n = i;
            if (cfg.mode == Mode::Discrete) {
                const auto counts = empirical_weight_counts(result.state, opts.snapshot_j_max);
                for (std::size_t j = 1; j < counts.size(); ++j)
                    snap.counts.emplace_back(static_cast<std::int64_t>(j), counts[j]);
            }
            const auto tails = empirical_tail_fraction(result.state, opts.t_grid);
            for (std::size_t l = 0; l < tails.size(); ++l)
                snap.tails.emplace_back(opts.t_grid[l], tails[l]);
            result.snapshots.push_back(std::move(snap));
        }
    }
    return result;
}

}  // namespace paw
