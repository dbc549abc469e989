#include "vomc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vomc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x1F83D9ABFB41BD6Bull)) {}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t id) {
  return mix64(mix64(seed + kGolden) + (id + 1) * kGolden);
}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

double Rng::next_open_double() {
  return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint32_t Rng::next_below(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  // rejection sampling on the top bits keeps the draw unbiased
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v > limit);
  return std::uint32_t(v % n);
}

double Rng::next_normal() {
  // Box-Muller, cosine branch only: two uniforms per variate, no rejection.
  const double u1 = next_open_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::next_gamma(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("next_gamma: alpha must be > 0");
  if (alpha < 1.0) {
    // boost: Gamma(a) = Gamma(a+1) * U^(1/a)
    const double g = next_gamma(alpha + 1.0);
    return g * std::pow(next_open_double(), 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_open_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void Rng::next_dirichlet(std::span<const double> alpha, std::span<double> out) {
  if (alpha.size() != out.size() || alpha.empty())
    throw std::invalid_argument("next_dirichlet: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = next_gamma(alpha[i]);
    total += out[i];
  }
  for (auto& v : out) v /= total;
}

}  // namespace vomc
