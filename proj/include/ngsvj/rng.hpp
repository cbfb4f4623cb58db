#pragma once

// Seedable random variates for the samplers.
//
// Every family is generated from our own PCG32 stream rather than the
// <random> distributions, whose algorithms are implementation-defined; this
// keeps chains bit-reproducible across standard libraries.
//
// Gamma is parameterized by shape and RATE throughout (mean = shape / rate).
// InverseGamma takes shape and SCALE (mean = scale / (shape - 1)).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "ngsvj/errors.hpp"

namespace ngsvj {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail

/// PCG32 (XSH-RR) generator with an explicit stream selector; one per chain.
class RngStream {
public:
  using result_type = std::uint32_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    inc_ = (detail::splitmix64(stream_id) << 1u) | 1u;
    state_ = 0;
    next();
    state_ += detail::splitmix64(seed ^ 0x6A09E667F3BCC909ULL);
    next();
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return 0xFFFFFFFFu; }
  result_type operator()() noexcept { return next(); }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    const std::uint64_t hi = next() >> 5;  // 27 bits
    const std::uint64_t lo = next() >> 6;  // 26 bits
    const std::uint64_t bits = (hi << 26) | lo;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method; the second variate is cached.
  double standard_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;

private:
  result_type next() noexcept {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {

// log of a Gamma(shape, 1) draw; shape > 0. Marsaglia-Tsang squeeze for
// shape >= 1, and the boost G(a) = G(a + 1) * U^(1/a) in log space for
// shape < 1.
inline double log_standard_gamma(double shape, RngStream& rng) {
  double log_boost = 0.0;
  if (shape < 1.0) {
    log_boost = std::log(rng.uniform()) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d) + std::log(v) + log_boost;
    }
  }
}

}  // namespace detail

/// Gamma(shape, rate). shape == 0 is the point mass at zero.
inline double sample_gamma(double shape, double rate, RngStream& rng) {
  detail::require(shape >= 0.0 && std::isfinite(shape), "sample_gamma: shape must be >= 0 and finite");
  detail::require(rate > 0.0 && std::isfinite(rate), "sample_gamma: rate must be positive and finite");
  if (shape == 0.0) return 0.0;
  return std::exp(detail::log_standard_gamma(shape, rng)) / rate;
}

/// N(mean, variance); variance == 0 returns mean exactly.
inline double sample_normal(double mean, double variance, RngStream& rng) {
  detail::require(variance >= 0.0 && std::isfinite(variance), "sample_normal: variance must be >= 0 and finite");
  if (variance == 0.0) return mean;
  return mean + std::sqrt(variance) * rng.standard_normal();
}

inline double sample_beta(double a, double b, RngStream& rng) {
  detail::require(a > 0.0 && std::isfinite(a), "sample_beta: a must be positive");
  detail::require(b > 0.0 && std::isfinite(b), "sample_beta: b must be positive");
  const double lx = detail::log_standard_gamma(a, rng);
  const double ly = detail::log_standard_gamma(b, rng);
  return 1.0 / (1.0 + std::exp(ly - lx));
}

/// InverseGamma(shape, scale): scale / Gamma(shape, 1).
inline double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  detail::require(shape > 0.0 && std::isfinite(shape), "sample_inverse_gamma: shape must be positive");
  detail::require(scale > 0.0 && std::isfinite(scale), "sample_inverse_gamma: scale must be positive");
  return scale * std::exp(-detail::log_standard_gamma(shape, rng));
}

inline int sample_bernoulli(double p, RngStream& rng) {
  detail::require(p >= 0.0 && p <= 1.0, "sample_bernoulli: p must lie in [0, 1]");
  if (p == 0.0) return 0;
  if (p == 1.0) return 1;
  return rng.uniform() < p ? 1 : 0;
}

inline double log_normal_density(double y, double mean, double variance) {
  detail::require(variance > 0.0 && std::isfinite(variance), "log_normal_density: variance must be positive");
  const double r = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

}  // namespace ngsvj
