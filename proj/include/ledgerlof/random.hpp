#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ledgerlof {

/// mt19937_64 with hand-rolled draws. The standard distributions are
/// implementation defined, so outputs from them are not stable across
/// standard libraries; these are.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in [0, n) without modulo bias. n must be positive.
  std::uint64_t below(std::uint64_t n)
  {
    std::uint64_t const limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double normal()
  {
    double u1 = uniform();
    while (u1 <= 0.0) { u1 = uniform(); }
    double const u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(double mean)
  {
    double u = uniform();
    while (u <= 0.0) { u = uniform(); }
    return -mean * std::log(u);
  }

  template <typename It> void shuffle(It first, It last)
  {
    auto const n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) { std::swap(first[i - 1], first[below(i)]); }
  }

private:
  std::mt19937_64 engine_;
};

} // namespace ledgerlof
