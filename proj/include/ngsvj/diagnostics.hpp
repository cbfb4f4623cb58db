#pragma once

// Likelihood, information criteria and chain-quality statistics.
//
// The deviance is conditional on the latent paths: D(y, Phi) = -2 log p(y | Phi)
// with Phi holding mu, the jumps J, lambda and gamma. Phi-bar is the
// element-wise posterior mean of all of them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ngsvj/errors.hpp"
#include "ngsvj/rng.hpp"

namespace ngsvj {

/// sum_t log N(y_t; mu + J_t, 1 / (gamma_t lambda_t)).
inline double conditional_log_lik(std::span<const double> y, double mu, std::span<const double> jumps,
                                  std::span<const double> lambda, std::span<const double> gamma) {
  const std::size_t n = y.size();
  if (jumps.size() != n || lambda.size() != n || gamma.size() != n)
    throw SizeError("conditional_log_lik: array lengths differ");
  constexpr double log_two_pi = 1.8378770664093454836;
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double precision = gamma[t] * lambda[t];
    if (!(precision > 0.0) || !std::isfinite(precision))
      throw DomainError("conditional_log_lik: non-positive variance at index " + std::to_string(t));
    const double r = y[t] - mu - jumps[t];
    acc += -0.5 * (log_two_pi - std::log(precision) + precision * r * r);
  }
  return acc;
}

/// -2 ln L + k ln n.
inline double compute_bic(double log_lik_hat, long long k, long long n) {
  if (k < 1) throw DomainError("compute_bic: k must be >= 1");
  if (n < 1) throw DomainError("compute_bic: n must be >= 1");
  return -2.0 * log_lik_hat + static_cast<double>(k) * std::log(static_cast<double>(n));
}

struct DicResult {
  double dic;
  double p_d;
  double mean_deviance;
};

inline DicResult compute_dic(std::span<const double> deviance_draws, double deviance_at_mean) {
  if (deviance_draws.empty()) throw SizeError("compute_dic: no deviance draws");
  const double mean =
      std::accumulate(deviance_draws.begin(), deviance_draws.end(), 0.0) / static_cast<double>(deviance_draws.size());
  const double p_d = mean - deviance_at_mean;
  return {deviance_at_mean + 2.0 * p_d, p_d, mean};
}

/// Fraction of t with lower[t] <= truth[t] <= upper[t].
inline double coverage(std::span<const double> truth, std::span<const double> lower, std::span<const double> upper) {
  if (lower.size() != truth.size() || upper.size() != truth.size())
    throw SizeError("coverage: array lengths differ");
  if (truth.empty()) throw SizeError("coverage: empty input");
  std::size_t inside = 0;
  for (std::size_t t = 0; t < truth.size(); ++t)
    if (lower[t] <= truth[t] && truth[t] <= upper[t]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(truth.size());
}

inline double rmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw SizeError("rmse: array lengths differ");
  if (truth.empty()) throw SizeError("rmse: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) ss += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  return std::sqrt(ss / static_cast<double>(truth.size()));
}

inline double mean_of(std::span<const double> x) {
  if (x.empty()) throw SizeError("mean_of: empty input");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample variance with the n - 1 denominator (0 for a single value).
inline double variance_of(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

/// Quantile by linear interpolation between order statistics (R type 7).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw SizeError("quantile: empty input");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, p);
}

namespace detail {

// Biased autocovariances up to max_lag.
inline std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  const double m = mean_of(x);
  std::vector<double> centred(n);
  for (std::size_t i = 0; i < n; ++i) centred[i] = x[i] - m;
  std::vector<double> acov(std::min(max_lag + 1, n), 0.0);
  for (std::size_t k = 0; k < acov.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += centred[i] * centred[i + k];
    acov[k] = s / static_cast<double>(n);
  }
  return acov;
}

}  // namespace detail

/// Effective sample size from Geyer's initial monotone positive sequence
/// estimate of the integrated autocorrelation time. Constant traces return n.
inline double ess(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 4) throw SizeError("ess: need at least 4 draws");
  // grow the lag window until the pair sums turn non-positive
  std::size_t window = std::min<std::size_t>(n - 1, 256);
  for (;;) {
    const auto acov = detail::autocovariance(trace, window);
    if (!(acov[0] > 0.0)) return static_cast<double>(n);
    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    bool terminated = false;
    for (std::size_t k = 0; k + 1 < acov.size(); k += 2) {
      double pair = (acov[k] + acov[k + 1]) / acov[0];
      if (pair <= 0.0) {
        terminated = true;
        break;
      }
      pair = std::min(pair, prev_pair);
      prev_pair = pair;
      tau += 2.0 * pair;
    }
    if (terminated || window >= n - 1) {
      tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
      return static_cast<double>(n) / tau;
    }
    window = std::min(n - 1, window * 4);
  }
}

/// Split-chain potential scale reduction factor. Each trace is cut in half;
/// all traces are truncated to the shortest length first.
inline double psrf(const std::vector<std::vector<double>>& traces) {
  if (traces.empty()) throw SizeError("psrf: no traces");
  std::size_t len = traces.front().size();
  for (const auto& t : traces) len = std::min(len, t.size());
  const std::size_t half = len / 2;
  if (half < 2) throw SizeError("psrf: traces too short");
  std::vector<std::span<const double>> pieces;
  for (const auto& t : traces) {
    pieces.emplace_back(t.data(), half);
    pieces.emplace_back(t.data() + (len - half), half);
  }
  const double n = static_cast<double>(half);
  std::vector<double> means, vars;
  for (auto p : pieces) {
    means.push_back(mean_of(p));
    vars.push_back(variance_of(p));
  }
  const double w = mean_of(vars);
  const double b = n * variance_of(means);
  if (!(w > 0.0)) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

}  // namespace ngsvj
