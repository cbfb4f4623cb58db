#pragma once

// Synthetic returns with square-root volatility, gamma-mixture innovations
// and Bernoulli jumps:
//   v_t = v_{t-1} + kappa (theta - v_{t-1}) Delta
//         + corr sigma_v sqrt(v_{t-1} Delta) e1 + sigma_v sqrt((1 - corr^2) v_{t-1} Delta) e2
//   r_t ~ N(mu + N_t xi_t, v_t / gamma_t),  N_t ~ Bernoulli(rho_y),
//   xi_t ~ N(mu_y, sigma_y^2),  gamma_t ~ Gamma(nu/2, nu/2).
// v_t is floored at kVolatilityFloor.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ngsvj/errors.hpp"
#include "ngsvj/model.hpp"
#include "ngsvj/rng.hpp"

namespace ngsvj {

inline constexpr double kVolatilityFloor = 1e-8;

struct SimConfig {
  std::size_t n = 5000;
  double mu = 0.05;
  double rho_y = 0.015;
  double mu_y = -2.5;
  double sigma_y = 4.0;
  double nu = 30.0;
  double delta = 1.0;
  double theta = 0.8;
  double kappa = 0.015;
  double sigma_v = 0.1;
  double corr = 0.4;
  std::optional<double> v0;  // defaults to theta
  std::uint64_t seed = 1;

  double initial_volatility() const { return v0.value_or(theta); }

  void validate() const {
    if (n < 1) throw ConfigError("SimConfig: n must be positive");
    if (!std::isfinite(mu) || !std::isfinite(mu_y)) throw ConfigError("SimConfig: mu and mu_y must be finite");
    if (!(rho_y >= 0.0 && rho_y <= 1.0)) throw ConfigError("SimConfig: rho_y must lie in [0, 1]");
    if (!(sigma_y >= 0.0)) throw ConfigError("SimConfig: sigma_y must be non-negative");
    if (!(nu > 0.0)) throw ConfigError("SimConfig: nu must be positive");
    if (!(delta > 0.0)) throw ConfigError("SimConfig: delta must be positive");
    if (!(theta > 0.0)) throw ConfigError("SimConfig: theta must be positive");
    if (!(kappa >= 0.0)) throw ConfigError("SimConfig: kappa must be non-negative");
    if (!(sigma_v >= 0.0)) throw ConfigError("SimConfig: sigma_v must be non-negative");
    if (!(corr > -1.0 && corr < 1.0)) throw ConfigError("SimConfig: corr must lie in (-1, 1)");
    if (!(initial_volatility() > 0.0)) throw ConfigError("SimConfig: v0 must be positive");
  }
};

/// Reference simulation design used for recovery checks.
inline SimConfig reference_sim_config(std::size_t n = 5000, std::uint64_t seed = 1) {
  SimConfig sc;
  sc.n = n;
  sc.seed = seed;
  return sc;
}

struct SimOutput {
  ReturnsSeries returns;
  std::vector<double> true_volatility;
  std::vector<double> true_jumps;
  std::vector<int> true_jump_times;
  std::vector<double> true_gamma;
};

inline SimOutput simulate(const SimConfig& sc) {
  sc.validate();
  RngStream rng(sc.seed, 0);
  std::vector<double> r(sc.n), v(sc.n), jumps(sc.n), gamma(sc.n);
  std::vector<int> times(sc.n);
  const double drift_scale = sc.corr * sc.sigma_v;
  const double indep_scale = sc.sigma_v * std::sqrt(1.0 - sc.corr * sc.corr);
  double prev = sc.initial_volatility();
  for (std::size_t t = 0; t < sc.n; ++t) {
    const double e1 = rng.standard_normal();
    const double e2 = rng.standard_normal();
    const double root = std::sqrt(prev * sc.delta);
    double cur = prev + sc.kappa * (sc.theta - prev) * sc.delta + drift_scale * root * e1 + indep_scale * root * e2;
    if (!(cur > kVolatilityFloor)) cur = kVolatilityFloor;
    v[t] = cur;
    times[t] = sample_bernoulli(sc.rho_y, rng);
    const double xi = sample_normal(sc.mu_y, sc.sigma_y * sc.sigma_y, rng);
    jumps[t] = times[t] ? xi : 0.0;
    gamma[t] = sample_gamma(0.5 * sc.nu, 0.5 * sc.nu, rng);
    r[t] = sample_normal(sc.mu + jumps[t], cur / gamma[t], rng);
    prev = cur;
  }
  return {ReturnsSeries(std::move(r)), std::move(v), std::move(jumps), std::move(times), std::move(gamma)};
}

}  // namespace ngsvj
