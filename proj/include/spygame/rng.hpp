#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace spygame {

/// mt19937_64 with hand-rolled distributions so that seeded streams are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform01() < p); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive combination of two seeds.
std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace spygame
