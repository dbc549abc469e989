#pragma once

// Counter-based pseudo-random stream (splitmix64 finalizer over a keyed
// counter).  All draws are pure 64-bit integer arithmetic plus IEEE double
// operations, so a (seed, stream) pair reproduces the same values on every
// platform.  Distribution sampling (normal, gamma, Dirichlet) is implemented
// here instead of with <random> because libstdc++/libc++ disagree on the
// variate algorithms and golden tests need stable bytes.

#include <cstdint>
#include <span>
#include <vector>

namespace vomc {

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Derive an independent seed for a child stream; used to give each
  // worker/tree its own generator without sharing state.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t id);

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double next_double();
  // Uniform on (0,1); safe to pass to log().
  double next_open_double();
  // Unbiased integer in [0, n), n >= 1.
  std::uint32_t next_below(std::uint32_t n);

  double next_normal();
  // Marsaglia-Tsang; alpha > 0.
  double next_gamma(double alpha);
  void next_dirichlet(std::span<const double> alpha, std::span<double> out);

 private:
  std::uint64_t state_;
};

}  // namespace vomc
