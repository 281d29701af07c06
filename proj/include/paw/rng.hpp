#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace paw {

/// Counter-based 64-bit generator (SplitMix64 output function over an
/// affine counter). The state is a plain counter, so a stream is fully
/// determined by its key; skipping ahead is O(1) and replay does not
/// depend on how many values other streams consumed.
class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0,1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0,1); never returns an exact 0 or 1,
    /// so continuous samplers built on it never emit an exact 0.
    double next_unit_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, n), n >= 1. Rejection on the 2^64 remainder.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double next_exponential(double rate) { return -std::log(next_unit_open()) / rate; }

    double next_uniform(double lo, double hi) { return lo + next_unit_open() * (hi - lo); }

    /// Standard normal, Marsaglia polar method with a cached spare.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit_open() - 1.0;
            v = 2.0 * next_unit_open() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 boosted through
    /// Gamma(shape + 1) * U^(1/shape).
    double next_gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = next_unit_open();
            return next_gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Purpose-keyed streams. Each purpose draws from its own counter stream,
/// so adding or removing draws of one purpose does not shift any other.
enum class Stream : std::uint64_t {
    AuthorCount = 1,    // nu_n draws
    Anchor = 2,         // weight-proportional anchor index
    UniformSet = 3,     // the k-1 uniform group members
    Bonus = 4,          // bonus vectors
    InitialWeight = 5,  // X draws (initial weights)
};

inline std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t replica = 0) {
    // Feed (seed, stream, replica) through the same mix as Rng::next_u64.
    Rng h(seed);
    std::uint64_t k = h.next_u64() ^ (static_cast<std::uint64_t>(stream) * 0xD1342543DE82EF95ULL);
    Rng h2(k);
    return h2.next_u64() ^ (replica * 0x2545F4914F6CDD1DULL);
}

/// One generator per purpose; the unit every engine replica owns.
struct RngSet {
    Rng author_count;
    Rng anchor;
    Rng uniform_set;
    Rng bonus;
    Rng initial_weight;

    static RngSet from_seed(std::uint64_t seed, std::uint64_t replica = 0) {
        return RngSet{
            Rng(derive_key(seed, Stream::AuthorCount, replica)),
            Rng(derive_key(seed, Stream::Anchor, replica)),
            Rng(derive_key(seed, Stream::UniformSet, replica)),
            Rng(derive_key(seed, Stream::Bonus, replica)),
            Rng(derive_key(seed, Stream::InitialWeight, replica)),
        };
    }
};

}  // namespace paw
