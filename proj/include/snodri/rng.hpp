#pragma once

#include "snodri/errors.hpp"
#include "snodri/stats.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace snodri {

/**
 * Deterministic random numbers for every seeded stage.
 *
 * The engine is mt19937_64 (fully specified by the standard) and all
 * variate transforms are implemented here rather than with the standard
 * <random> distributions, whose output is implementation-defined. Two
 * builds of the same seed therefore produce identical streams.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double canonical() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in the open interval (0, 1); safe input for quantile maps.
    double open_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

    /// Standard normal via the inverse-CDF map.
    double normal() { return stats::normal_quantile(open_unit()); }

    double normal(double mean, double std) { return mean + std * normal(); }

    /// Uniform index in [0, n) by 128-bit multiply (no modulo bias to speak of).
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw NumericError("uniform_index: empty range");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /**
     * Gamma(shape, scale) draw, Marsaglia–Tsang squeeze method.
     * shape < 1 is boosted to shape + 1 and corrected by u^(1/shape).
     */
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0)) {
            throw NumericError("gamma draw: shape and scale must be positive");
        }
        if (shape < 1.0) {
            const double u = open_unit();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = open_unit();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    /// In-place Fisher–Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

namespace seeds {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Independent substream seed: stream i of a base seed.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

/// Per-stage seed, keyed by name so adding a stage never shifts another's stream.
inline std::uint64_t derive_stage(std::uint64_t seed, std::string_view stage_name) {
    return derive(seed, stats::fnv1a64(stage_name));
}

}  // namespace seeds

}  // namespace snodri
