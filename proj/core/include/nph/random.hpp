#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nph {

// splitmix64 finalizer; used to turn (seed, index, ...) tuples into
// well-separated engine seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

// A reproducible random stream. Every replicate, permutation and subject
// draw in the library comes from a Stream derived from an explicit seed
// path, so results never depend on execution order or thread count.
//
// Variates are produced from raw 64-bit engine output with fixed formulas
// (no std::*_distribution), which keeps streams identical across standard
// library implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  static Stream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform();

  // Exponential with the given rate (> 0).
  double exponential(double rate);

  // Uniform on [lo, hi].
  double uniform(double lo, double hi);

  // Uniform integer in [0, n); n > 0. Unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace nph
