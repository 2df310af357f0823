#pragma once

#include <cstdint>
#include <random>
#include <span>

// Deterministic randomness helpers.  std::mt19937_64 is bit-stable across
// platforms, but the standard *distributions* are not, so every value stream
// here is derived explicitly from raw engine output.

namespace qpa {

// splitmix64 scramble; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t z);

// Stable per-stream seed: scramble(base + (stream+1) * golden-gamma).
// Stream k of a given base never depends on how many streams are drawn.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi);
    // Box-Muller (no cached spare, so the draw count per call is fixed).
    double gaussian(double mean, double sd);
    // Index draw proportional to non-negative weights (not necessarily
    // normalized) via CDF inversion.  Throws std::domain_error when the
    // total weight is not positive.
    int categorical(std::span<const double> weights);
    int uniform_int(int lo, int hi);   // inclusive bounds

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace qpa
