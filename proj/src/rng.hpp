#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace firetree {

// SplitMix64 mixing step; used for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-trial seed from (master seed, trial index). Two SplitMix64 rounds over
// the golden-ratio-spread index; scheduling-independent by construction.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b >> 1);
}

// Deterministic generator with explicit inversion samplers. The mt19937_64
// output sequence is pinned by the standard; std::*_distribution is avoided
// because its mapping to draws is implementation-defined, which would break
// the byte-identical reproducibility contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }

  // Uniform on [0,1) with 53-bit mantissa.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); zero is resampled.
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Uniform on {0, ..., bound-1}, bound >= 1, by masked rejection.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t v;
    do {
      v = eng_() & mask;
    } while (v >= bound);
    return v;
  }

  // Uniform on {lo, ..., hi} inclusive.
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace firetree
