#pragma once

#include <cstdint>
#include <random>

namespace epifit {

/// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

/// Seeded random source with self-contained samplers.
///
/// The engine (mt19937_64) is fully specified by the standard and all
/// samplers below are implemented here rather than taken from
/// <random>, so a given seed produces the same stream on every
/// platform and toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n). Rejection sampled, n >= 1.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Standard normal (Box-Muller, no cache).
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Gamma(shape, rate) via Marsaglia-Tsang squeeze. shape, rate > 0.
    double gamma(double shape, double rate);

    /// Poisson(mean), mean >= 0. Knuth product for small means,
    /// Hormann's PTRS transformed rejection for large ones.
    long long poisson(double mean);

private:
    std::mt19937_64 engine_;
};

} // namespace epifit
