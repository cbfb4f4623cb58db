#pragma once

// Data, configuration, parameter and latent-path types.
//
// Index alignment: the jump size xi[t] and indicator jump_ind[t] sit at the
// same index as the return y[t] they shift, so J[t] = xi[t] * jump_ind[t].
// Volatility is held as the precision lambda[t]; lambda^-1 is the variance
// scale and lambda^-1/2 the standard-deviation scale.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngsvj/errors.hpp"

namespace ngsvj {

/// Log-returns in percent, y[t] = 100 * (ln S[t+1] - ln S[t]).
class ReturnsSeries {
public:
  explicit ReturnsSeries(std::vector<double> returns,
                         std::optional<std::vector<std::string>> timestamps = std::nullopt)
      : returns_(std::move(returns)), timestamps_(std::move(timestamps)) {
    if (returns_.empty()) throw SizeError("ReturnsSeries: at least one return is required");
    for (std::size_t t = 0; t < returns_.size(); ++t) {
      if (!std::isfinite(returns_[t]))
        throw DomainError("ReturnsSeries: non-finite return at index " + std::to_string(t));
    }
    if (timestamps_ && timestamps_->size() != returns_.size())
      throw SizeError("ReturnsSeries: timestamps length differs from returns length");
  }

  std::size_t size() const noexcept { return returns_.size(); }
  std::span<const double> values() const noexcept { return returns_; }
  double operator[](std::size_t t) const noexcept { return returns_[t]; }
  const std::optional<std::vector<std::string>>& timestamps() const noexcept { return timestamps_; }

private:
  std::vector<double> returns_;
  std::optional<std::vector<std::string>> timestamps_;
};

/// Prior hyperparameters.
///   mu      ~ N(mu_mean, mu_var)
///   mu_y    ~ N(jumpmean_mean, jumpmean_var)
///   sigma2_y ~ InverseGamma(jumpvar_shape, jumpvar_scale)
///   rho_y   ~ Beta(rho_a, rho_b)
struct Priors {
  double mu_mean = 0.0;
  double mu_var = 100.0;
  double jumpmean_mean = 0.0;
  double jumpmean_var = 100.0;
  double jumpvar_shape = 0.1;
  double jumpvar_scale = 0.1;
  double rho_a = 2.0;
  double rho_b = 40.0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("Priors: ") + name + " must be positive");
    };
    if (!std::isfinite(mu_mean)) throw ConfigError("Priors: mu_mean must be finite");
    if (!std::isfinite(jumpmean_mean)) throw ConfigError("Priors: jumpmean_mean must be finite");
    positive(mu_var, "mu_var");
    positive(jumpmean_var, "jumpmean_var");
    positive(jumpvar_shape, "jumpvar_shape");
    positive(jumpvar_scale, "jumpvar_scale");
    positive(rho_a, "rho_a");
    positive(rho_b, "rho_b");
  }

  friend bool operator==(const Priors&, const Priors&) = default;
};

/// Fixed model constants plus priors. Construct through make() to get a
/// validated value; the fields stay public for reading.
struct ModelConfig {
  double nu = 30.0;              // Student-t degrees of freedom of the gamma mixture
  double omega = 0.9;            // discount factor, (0, 1]
  double jump_threshold = 0.7;   // declare a jump when P(N = 1 | ...) > threshold
  double a0 = 0.1;               // initial filter shape
  double b0 = 0.1;               // initial filter rate
  bool jumps_enabled = true;     // false gives the jump-free reduction
  Priors priors{};

  void validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("ModelConfig: nu must be positive");
    if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("ModelConfig: omega must lie in (0, 1]");
    if (!(jump_threshold > 0.0 && jump_threshold < 1.0))
      throw ConfigError("ModelConfig: jump_threshold must lie in (0, 1)");
    if (!(a0 > 0.0) || !std::isfinite(a0)) throw ConfigError("ModelConfig: a0 must be positive");
    if (!(b0 > 0.0) || !std::isfinite(b0)) throw ConfigError("ModelConfig: b0 must be positive");
    priors.validate();
  }

  static ModelConfig make(double nu, double omega, double jump_threshold, double a0, double b0,
                          bool jumps_enabled, Priors priors) {
    ModelConfig cfg{nu, omega, jump_threshold, a0, b0, jumps_enabled, priors};
    cfg.validate();
    return cfg;
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// nu = 30, omega = 0.9, threshold 0.7, a0 = b0 = 0.1, N(0,100) priors on both
/// means, IG(0.1, 0.1) on the jump variance and Beta(2, 40) on the jump rate.
inline ModelConfig default_config() { return ModelConfig{}; }

struct StaticParams {
  double mu = 0.0;
  double rho_y = 0.0;
  double mu_y = 0.0;
  double sigma2_y = 1.0;

  friend bool operator==(const StaticParams&, const StaticParams&) = default;
};

struct LatentPath {
  std::vector<double> lambda;
  std::vector<double> gamma;
  std::vector<double> xi;
  std::vector<int> jump_ind;

  LatentPath() = default;
  explicit LatentPath(std::size_t n) : lambda(n, 1.0), gamma(n, 1.0), xi(n, 0.0), jump_ind(n, 0) {}

  std::size_t size() const noexcept { return lambda.size(); }
  double jump(std::size_t t) const noexcept { return jump_ind[t] ? xi[t] : 0.0; }

  std::vector<double> jumps() const {
    std::vector<double> out(size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = jump(t);
    return out;
  }

  friend bool operator==(const LatentPath&, const LatentPath&) = default;
};

inline ReturnsSeries prices_to_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw SizeError("prices_to_returns: at least 2 prices are required");
  std::vector<double> out(prices.size() - 1);
  for (std::size_t t = 0; t < prices.size(); ++t) {
    if (!(prices[t] > 0.0) || !std::isfinite(prices[t]))
      throw DomainError("prices_to_returns: non-positive price at index " + std::to_string(t));
  }
  for (std::size_t t = 0; t + 1 < prices.size(); ++t)
    out[t] = 100.0 * (std::log(prices[t + 1]) - std::log(prices[t]));
  return ReturnsSeries(std::move(out));
}

/// Inverse of prices_to_returns given the first price.
inline std::vector<double> returns_to_prices(std::span<const double> returns, double first_price) {
  std::vector<double> prices(returns.size() + 1);
  prices[0] = first_price;
  double log_price = std::log(first_price);
  for (std::size_t t = 0; t < returns.size(); ++t) {
    log_price += returns[t] / 100.0;
    prices[t + 1] = std::exp(log_price);
  }
  return prices;
}

}  // namespace ngsvj
