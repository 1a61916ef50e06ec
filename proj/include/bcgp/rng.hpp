#pragma once

#include <cstdint>
#include <random>

namespace bcgp {

/// Seeded random-number source. Every sampler and design generator takes one
/// of these explicitly; nothing in the library draws from hidden global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// U(0,1)
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  /// U(lo,hi)
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  /// N(0,1)
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  /// Gamma with given shape and scale (mean = shape*scale).
  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }

  /// Integer in [0, bound).
  std::uint64_t integer(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  /// Independent stream derived from `seed` and a stream index, for
  /// reproducible parallel work (chains, prediction points).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer on the combined value
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bcgp
