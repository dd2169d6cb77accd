#pragma once

#include <cstdint>
#include <random>

namespace csd {

// Deterministic RNG for the simulator. The engine (mt19937_64) has a
// bit-exact output sequence guaranteed by the standard; the transforms below
// are spelled out here rather than taken from std::<distribution>, whose
// algorithms vary between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent substream for (seed, tag); used for per-layer generation.
    static Rng substream(std::uint64_t seed, std::uint64_t tag);

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi); // inclusive

    // Box-Muller; two uniforms per draw, no caching.
    double normal(double mean = 0.0, double stddev = 1.0);

    // Marsaglia-Tsang; shape > 0, unit scale.
    double gamma(double shape);

    // Knuth below lambda = 30, halving split above (exact by additivity).
    std::int64_t poisson(double lambda);

    // Gamma ratio.
    double beta(double a, double b);

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace csd
