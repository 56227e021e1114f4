// nlpot/rng.hpp
//
// Deterministic random number generation. SplitMix64 plus hand-rolled
// uniform mappings: unlike std::uniform_*_distribution, the byte stream
// here is identical across standard library implementations, which the
// seeded-report reproducibility contract depends on.
#pragma once

#include <cstdint>

namespace nlpot {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]: 53 random bits, shifted away from zero so that
    // test densities/weights are strictly positive.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform in [a, b).
    double uniform(double a, double b) {
        const double t = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return a + t * (b - a);
    }

    // Uniform integer in [lo, hi] (inclusive). Bias is < 2^-32 for the
    // small ranges used here; determinism is what matters.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t v = (next_u64() >> 32) * span >> 32;
        return lo + static_cast<int>(v);
    }

  private:
    std::uint64_t state_;
};

}  // namespace nlpot
