#pragma once

// Closed-form full conditionals of the jump model. Each family exposes its
// posterior parameters (so tests can check conjugacy without sampling) and a
// sampler that draws from them.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "ngsvj/errors.hpp"
#include "ngsvj/model.hpp"
#include "ngsvj/rng.hpp"

namespace ngsvj {

struct NormalParams {
  double mean;
  double variance;
  friend bool operator==(const NormalParams&, const NormalParams&) = default;
};

struct GammaParams {
  double shape;
  double rate;
  friend bool operator==(const GammaParams&, const GammaParams&) = default;
};

struct InverseGammaParams {
  double shape;
  double scale;
  friend bool operator==(const InverseGammaParams&, const InverseGammaParams&) = default;
};

struct BetaParams {
  double a;
  double b;
  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

namespace detail {
inline void require_same_length(std::size_t n, std::initializer_list<std::size_t> others, const char* who) {
  for (auto m : others)
    if (m != n) throw SizeError(std::string(who) + ": array lengths differ");
}
}  // namespace detail

// ---- mu -------------------------------------------------------------------

/// Conjugate normal update for the static mean; the constant-state FFBS
/// collapses to this. Weights are gamma_t * lambda_t.
inline NormalParams mu_posterior(std::span<const double> y, std::span<const double> jumps,
                                 std::span<const double> lambda, std::span<const double> gamma,
                                 const Priors& priors) {
  detail::require_same_length(y.size(), {jumps.size(), lambda.size(), gamma.size()}, "mu_posterior");
  double precision = 1.0 / priors.mu_var;
  double weighted = priors.mu_mean / priors.mu_var;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double w = gamma[t] * lambda[t];
    precision += w;
    weighted += w * (y[t] - jumps[t]);
  }
  const double v = 1.0 / precision;
  return {v * weighted, v};
}

inline double sample_mu(std::span<const double> y, std::span<const double> jumps,
                        std::span<const double> lambda, std::span<const double> gamma,
                        const Priors& priors, RngStream& rng) {
  const auto p = mu_posterior(y, jumps, lambda, gamma, priors);
  return sample_normal(p.mean, p.variance, rng);
}

// ---- gamma (mixture weights) ------------------------------------------------

inline GammaParams mixture_posterior(double residual, double lambda_t, double nu) {
  return {0.5 * nu + 0.5, 0.5 * nu + 0.5 * lambda_t * residual * residual};
}

inline std::vector<double> sample_gamma_path(std::span<const double> y, double mu,
                                             std::span<const double> jumps,
                                             std::span<const double> lambda, const ModelConfig& cfg,
                                             RngStream& rng) {
  detail::require_same_length(y.size(), {jumps.size(), lambda.size()}, "sample_gamma_path");
  std::vector<double> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    const auto p = mixture_posterior(y[t] - mu - jumps[t], lambda[t], cfg.nu);
    out[t] = sample_gamma(p.shape, p.rate, rng);
  }
  return out;
}

// ---- jump-size mean and variance -------------------------------------------

/// Only the sizes at declared jump times enter; an empty span gives the prior.
inline NormalParams jump_mean_posterior(std::span<const double> xi_at_jumps, double sigma2_y,
                                        const Priors& priors) {
  if (!(sigma2_y > 0.0)) throw DomainError("jump_mean_posterior: sigma2_y must be positive");
  const double n = static_cast<double>(xi_at_jumps.size());
  double sum = 0.0;
  for (double x : xi_at_jumps) sum += x;
  const double m = priors.jumpmean_mean;
  const double v = priors.jumpmean_var;
  const double denom = sigma2_y + n * v;
  // n * xi_bar == sum
  return {(m * sigma2_y + v * sum) / denom, v * sigma2_y / denom};
}

inline double sample_jump_mean(std::span<const double> xi_at_jumps, double sigma2_y, const Priors& priors,
                               RngStream& rng) {
  const auto p = jump_mean_posterior(xi_at_jumps, sigma2_y, priors);
  return sample_normal(p.mean, p.variance, rng);
}

inline InverseGammaParams jump_var_posterior(std::span<const double> xi_at_jumps, double mu_y,
                                             const Priors& priors) {
  double ss = 0.0;
  for (double x : xi_at_jumps) ss += (x - mu_y) * (x - mu_y);
  return {priors.jumpvar_shape + 0.5 * static_cast<double>(xi_at_jumps.size()),
          priors.jumpvar_scale + 0.5 * ss};
}

inline double sample_jump_var(std::span<const double> xi_at_jumps, double mu_y, const Priors& priors,
                              RngStream& rng) {
  const auto p = jump_var_posterior(xi_at_jumps, mu_y, priors);
  return sample_inverse_gamma(p.shape, p.scale, rng);
}

// ---- jump sizes --------------------------------------------------------------

/// excess = y_t - mu, obs_var = 1 / (gamma_t lambda_t).
inline NormalParams jump_size_posterior(double excess, double obs_var, double mu_y, double sigma2_y) {
  const double denom = sigma2_y + obs_var;
  return {(mu_y * obs_var + excess * sigma2_y) / denom, sigma2_y * obs_var / denom};
}

inline std::vector<double> sample_jump_sizes(std::span<const double> y, double mu,
                                             std::span<const double> lambda,
                                             std::span<const double> gamma, double mu_y, double sigma2_y,
                                             RngStream& rng) {
  detail::require_same_length(y.size(), {lambda.size(), gamma.size()}, "sample_jump_sizes");
  std::vector<double> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    const auto p = jump_size_posterior(y[t] - mu, 1.0 / (gamma[t] * lambda[t]), mu_y, sigma2_y);
    out[t] = sample_normal(p.mean, p.variance, rng);
  }
  return out;
}

// ---- jump indicators ---------------------------------------------------------

/// P(N_t = 1 | y_t, xi_t, ...) for a single observation, as the logistic of
/// the log-odds.
inline double jump_probability(double excess, double xi, double obs_var, double rho_y) {
  if (rho_y <= 0.0) return 0.0;
  if (rho_y >= 1.0) return 1.0;
  const double with_jump = excess - xi;
  const double log_odds =
      std::log(rho_y) - std::log1p(-rho_y) + 0.5 * (excess * excess - with_jump * with_jump) / obs_var;
  if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return e / (1.0 + e);
}

inline std::vector<double> jump_indicator_probs(std::span<const double> y, double mu,
                                                std::span<const double> lambda,
                                                std::span<const double> gamma, std::span<const double> xi,
                                                double rho_y) {
  detail::require_same_length(y.size(), {lambda.size(), gamma.size(), xi.size()}, "jump_indicator_probs");
  if (!(rho_y >= 0.0 && rho_y <= 1.0)) throw DomainError("jump_indicator_probs: rho_y must lie in [0, 1]");
  std::vector<double> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t)
    out[t] = jump_probability(y[t] - mu, xi[t], 1.0 / (gamma[t] * lambda[t]), rho_y);
  return out;
}

/// N_t = 1 iff p_t > threshold (ties are non-jumps).
inline std::vector<int> apply_jump_threshold(std::span<const double> probs, double threshold) {
  std::vector<int> out(probs.size());
  for (std::size_t t = 0; t < probs.size(); ++t) out[t] = probs[t] > threshold ? 1 : 0;
  return out;
}

// ---- jump probability --------------------------------------------------------

inline BetaParams rho_posterior(std::span<const int> jump_ind, const Priors& priors) {
  double count = 0.0;
  for (int v : jump_ind) count += v;
  return {priors.rho_a + count, priors.rho_b + static_cast<double>(jump_ind.size()) - count};
}

inline double sample_rho(std::span<const int> jump_ind, const Priors& priors, RngStream& rng) {
  const auto p = rho_posterior(jump_ind, priors);
  return sample_beta(p.a, p.b, rng);
}

/// Sizes at the times currently flagged as jumps.
inline std::vector<double> xi_at_jumps(std::span<const double> xi, std::span<const int> jump_ind) {
  std::vector<double> out;
  for (std::size_t t = 0; t < xi.size(); ++t)
    if (jump_ind[t]) out.push_back(xi[t]);
  return out;
}

}  // namespace ngsvj
