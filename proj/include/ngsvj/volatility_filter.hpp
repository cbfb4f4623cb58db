#pragma once

// Exact block draw of the precision path lambda_1..lambda_n given the mean,
// jumps and mixture weights.
//
// Forward pass (Gamma-Beta discount filter):
//   lambda_t | Y_{t-1} ~ Gamma(omega a_{t-1}, omega b_{t-1})
//   lambda_t | Y_t     ~ Gamma(a_t, b_t),
//   a_t = omega a_{t-1} + 1/2,  b_t = omega b_{t-1} + gamma_t (y_t - mu - J_t)^2 / 2.
// Backward pass:
//   lambda_n ~ Gamma(a_n, b_n),
//   lambda_t = omega lambda_{t+1} + eta_t,  eta_t ~ Gamma((1 - omega) a_t, b_t).

#include <cstddef>
#include <span>
#include <vector>

#include "ngsvj/errors.hpp"
#include "ngsvj/model.hpp"
#include "ngsvj/rng.hpp"

namespace ngsvj {

/// Filter parameters a[0..n], b[0..n]; index 0 holds (a0, b0).
struct FilterState {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t steps() const noexcept { return a.empty() ? 0 : a.size() - 1; }
  friend bool operator==(const FilterState&, const FilterState&) = default;
};

inline constexpr double kFilterRateFloor = 1e-300;

inline void forward_filter_into(std::span<const double> y, double mu, std::span<const double> jumps,
                                std::span<const double> gamma, double omega, double a0, double b0,
                                FilterState& fs) {
  const std::size_t n = y.size();
  if (jumps.size() != n || gamma.size() != n) throw SizeError("forward_filter: array lengths differ");
  fs.a.resize(n + 1);
  fs.b.resize(n + 1);
  fs.a[0] = a0;
  fs.b[0] = b0;
  for (std::size_t t = 0; t < n; ++t) {
    const double r = y[t] - mu - jumps[t];
    fs.a[t + 1] = omega * fs.a[t] + 0.5;
    const double b = omega * fs.b[t] + 0.5 * gamma[t] * r * r;
    fs.b[t + 1] = b < kFilterRateFloor ? kFilterRateFloor : b;
  }
}

inline FilterState forward_filter(const ReturnsSeries& y, double mu, std::span<const double> jumps,
                                  std::span<const double> gamma, const ModelConfig& cfg) {
  FilterState fs;
  forward_filter_into(y.values(), mu, jumps, gamma, cfg.omega, cfg.a0, cfg.b0, fs);
  return fs;
}

inline void backward_sample_into(const FilterState& fs, double omega, RngStream& rng,
                                 std::span<double> lambda) {
  const std::size_t n = fs.steps();
  if (lambda.size() != n) throw SizeError("backward_sample: output length differs from filter length");
  if (n == 0) return;
  lambda[n - 1] = sample_gamma(fs.a[n], fs.b[n], rng);
  const double keep = 1.0 - omega;
  for (std::size_t t = n - 1; t-- > 0;) {
    const double eta = sample_gamma(keep * fs.a[t + 1], fs.b[t + 1], rng);
    lambda[t] = omega * lambda[t + 1] + eta;
  }
}

inline std::vector<double> backward_sample(const FilterState& fs, const ModelConfig& cfg, RngStream& rng) {
  std::vector<double> lambda(fs.steps());
  backward_sample_into(fs, cfg.omega, rng, lambda);
  return lambda;
}

}  // namespace ngsvj
