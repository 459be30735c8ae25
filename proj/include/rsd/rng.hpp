#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace rsd {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable seed derivation: every stream used anywhere in the project is
// derived from one master seed plus integer tags (quarter, day, case index,
// ...), so serial and parallel execution draw from identical streams.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(master ^ 0x8f0ab5u);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t));
  return h;
}

// Self-contained generator (splitmix64 stream). std::* distributions are
// implementation-defined, so all transforms live here to keep outputs
// bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Box-Muller, no spare caching.
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform over {lo, ..., hi} inclusive via rejection-free Lemire-style
  // scaling (bias negligible at these ranges, determinism is what matters).
  int uniform_int(int lo, int hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  // Geometric on {1, 2, ...} with success probability p; mean 1/p.
  int geometric(double p) {
    double u = uniform_pos();
    double g = std::floor(std::log(u) / std::log1p(-p));
    return 1 + static_cast<int>(g);
  }

 private:
  std::uint64_t state_;
};

}  // namespace rsd
