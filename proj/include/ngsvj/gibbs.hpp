#pragma once

// Block Gibbs sampler for the jump model. One sweep updates, in order:
//   mu | y, J, lambda, gamma                      (conjugate normal)
//   lambda | y, mu, J, gamma                      (forward filter, backward sample)
//   gamma | y, mu, J, lambda                      (independent gammas)
//   mu_y | xi at jump times, sigma2_y
//   sigma2_y | xi at jump times, mu_y
//   xi | y, mu, lambda, gamma, mu_y, sigma2_y     then N by the threshold rule
//   rho_y | N
// With jumps disabled the last four steps are skipped and J stays zero.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>


#include "ngsvj/conditionals.hpp"
#include "ngsvj/diagnostics.hpp"
#include "ngsvj/errors.hpp"
#include "ngsvj/model.hpp"
#include "ngsvj/rng.hpp"
#include "ngsvj/volatility_filter.hpp"

namespace ngsvj {

struct ChainState {
  StaticParams params;
  LatentPath path;
};

struct RunSpec {
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin_lag = 1;
  std::size_t n_chains = 1;
  std::uint64_t seed = 1;
  std::vector<ChainState> init;  // optional explicit start per chain id
  // Full latent paths are kept per retained draw only while draws * n stays
  // within this many time points; otherwise only running summaries are kept.
  std::size_t path_budget = 5'000'000;

  std::size_t retained() const noexcept { return iterations > burn_in ? (iterations - burn_in) / thin_lag : 0; }

  void validate() const {
    if (iterations == 0) throw ConfigError("RunSpec: iterations must be positive");
    if (thin_lag == 0) throw ConfigError("RunSpec: thin_lag must be >= 1");
    if (n_chains == 0) throw ConfigError("RunSpec: n_chains must be >= 1");
    if (burn_in >= iterations) throw ConfigError("RunSpec: burn_in must be smaller than iterations");
    if (retained() < 1) throw ConfigError("RunSpec: (iterations - burn_in) / thin_lag must be >= 1");
  }
};

/// Running quantiles of one scalar stream: exact while the stream is short,
/// P-square markers afterwards.
class TailQuantiles {
public:
  static constexpr double kLower = 0.025;
  static constexpr double kUpper = 0.975;

  /// Exact type-7 tail quantiles for up to `capacity` values; 0 keeps every value.
  explicit TailQuantiles(std::size_t capacity = 0)
      : capacity_(capacity),
        keep_lo_(capacity ? lower_rank_count(capacity) : SIZE_MAX),
        keep_hi_(capacity ? upper_rank_count(capacity) : SIZE_MAX) {}

  void add(double x) {
    if (capacity_ && count_ == capacity_) throw std::logic_error("TailQuantiles: capacity exceeded");
    ++count_;
    if (lo_.size() < keep_lo_) {
      lo_.push_back(x);
      std::push_heap(lo_.begin(), lo_.end());
    } else if (x < lo_.front()) {
      std::pop_heap(lo_.begin(), lo_.end());
      lo_.back() = x;
      std::push_heap(lo_.begin(), lo_.end());
    }
    if (hi_.size() < keep_hi_) {
      hi_.push_back(x);
      std::push_heap(hi_.begin(), hi_.end(), std::greater<>{});
    } else if (x > hi_.front()) {
      std::pop_heap(hi_.begin(), hi_.end(), std::greater<>{});
      hi_.back() = x;
      std::push_heap(hi_.begin(), hi_.end(), std::greater<>{});
    }
  }

  std::size_t count() const noexcept { return count_; }
  std::size_t stored() const noexcept { return lo_.size() + hi_.size(); }

  std::pair<double, double> bounds() const { return pooled({this}); }

  /// Exact bounds of the union of several streams, each sized for the total.
  static std::pair<double, double> pooled(const std::vector<const TailQuantiles*>& parts) {
    std::size_t total = 0;
    std::vector<double> lo, hi;
    for (const auto* q : parts) {
      total += q->count_;
      lo.insert(lo.end(), q->lo_.begin(), q->lo_.end());
      hi.insert(hi.end(), q->hi_.begin(), q->hi_.end());
    }
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (total == 0) return {nan, nan};
    for (const auto* q : parts)
      if (q->capacity_ && q->capacity_ < total) throw std::logic_error("TailQuantiles: pooled count exceeds capacity");
    std::sort(lo.begin(), lo.end());
    std::sort(hi.begin(), hi.end());
    const std::size_t hi_offset = total - hi.size();  // hi[j] is order statistic hi_offset + j
    auto at_lo = [&](std::size_t i) { return lo[std::min(i, lo.size() - 1)]; };
    auto at_hi = [&](std::size_t i) { return hi[std::min(i, total - 1) - std::min(hi_offset, i)]; };
    auto type7 = [&](double p, auto at) {
      const double h = static_cast<double>(total - 1) * p;
      const auto i = static_cast<std::size_t>(std::floor(h));
      const double lower = at(i);
      return i + 1 < total ? lower + (h - static_cast<double>(i)) * (at(i + 1) - lower) : lower;
    };
    return {type7(kLower, at_lo), type7(kUpper, at_hi)};
  }

private:
  static std::size_t lower_rank_count(std::size_t n) {
    return std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * kLower)) + 2);
  }
  static std::size_t upper_rank_count(std::size_t n) {
    return n - static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * kUpper));
  }

  std::size_t capacity_;
  std::size_t keep_lo_, keep_hi_;
  std::vector<double> lo_, hi_;  // max-heap of the smallest values, min-heap of the largest
  std::size_t count_ = 0;
};

/// Per-time-step posterior summaries accumulated over retained draws.
class LatentSummary {
public:
  LatentSummary() = default;
  /// `capacity` bounds the number of draws whose variance tails are pooled.
  LatentSummary(std::size_t n, std::size_t capacity)
      : n_(n), sum_lambda_(n), sum_gamma_(n), sum_jump_(n), sum_sd_(n), sum_prob_(n), sum_ind_(n),
        mean_var_(n), m2_var_(n), tails_(n, TailQuantiles(capacity)) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t draws() const noexcept { return draws_; }

  void add(const LatentPath& path, std::span<const double> probs) {
    ++draws_;
    const double k = static_cast<double>(draws_);
    for (std::size_t t = 0; t < n_; ++t) {
      const double lam = path.lambda[t];
      const double var = 1.0 / lam;
      sum_lambda_[t] += lam;
      sum_gamma_[t] += path.gamma[t];
      sum_jump_[t] += path.jump(t);
      sum_sd_[t] += std::sqrt(var);
      sum_prob_[t] += probs[t];
      sum_ind_[t] += path.jump_ind[t];
      const double delta = var - mean_var_[t];
      mean_var_[t] += delta / k;
      m2_var_[t] += delta * (var - mean_var_[t]);
      tails_[t].add(var);
    }
  }

  struct Row {
    double mean_lambda, mean_gamma, mean_jump;
    double mean_var, sd_var, var_lo, var_hi;
    double mean_sd, sd_lo, sd_hi;
    double jump_prob, jump_freq;
  };

  Row row(std::size_t t) const {
    const double k = static_cast<double>(draws_);
    Row r{};
    r.mean_lambda = sum_lambda_[t] / k;
    r.mean_gamma = sum_gamma_[t] / k;
    r.mean_jump = sum_jump_[t] / k;
    r.mean_var = mean_var_[t];
    r.sd_var = draws_ > 1 ? std::sqrt(m2_var_[t] / (k - 1.0)) : 0.0;
    std::tie(r.var_lo, r.var_hi) = tails_[t].bounds();
    r.mean_sd = sum_sd_[t] / k;
    r.sd_lo = std::sqrt(r.var_lo);
    r.sd_hi = std::sqrt(r.var_hi);
    r.jump_prob = sum_prob_[t] / k;
    r.jump_freq = sum_ind_[t] / k;
    return r;
  }

  const TailQuantiles& tails(std::size_t t) const { return tails_[t]; }

  std::vector<Row> rows() const {
    std::vector<Row> out(n_);
    for (std::size_t t = 0; t < n_; ++t) out[t] = row(t);
    return out;
  }

private:
  std::size_t n_ = 0;
  std::size_t draws_ = 0;
  std::vector<double> sum_lambda_, sum_gamma_, sum_jump_, sum_sd_, sum_prob_, sum_ind_;
  std::vector<double> mean_var_, m2_var_;
  std::vector<TailQuantiles> tails_;
};

struct ChainMeta {
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thin_lag = 1;
  bool jumps_enabled = true;
};

/// Retained draws of one chain. For the jump-free model rho_y, mu_y and
/// sigma2_y are NaN in every draw.
struct ChainOutput {
  ChainMeta meta;
  ChainState start;
  std::vector<std::size_t> iteration;
  std::vector<StaticParams> params;
  std::vector<double> log_lik;
  std::vector<LatentPath> paths;  // empty unless within RunSpec::path_budget
  LatentSummary summary;

  std::size_t draws() const noexcept { return params.size(); }
  bool paths_retained() const noexcept { return !paths.empty(); }
};

struct SweepScratch {
  FilterState filter;
  std::vector<double> jumps;
  std::vector<double> probs;
};

struct SweepOptions {
  // false holds N fixed (used when validating the remaining kernel).
  bool update_indicators = true;
};

/// One full Gibbs sweep in place. On return scratch.jumps holds J and
/// scratch.probs the jump probabilities of this sweep.
inline void gibbs_sweep(std::span<const double> y, const ModelConfig& cfg, ChainState& s, RngStream& rng,
                        SweepScratch& w, SweepOptions opt = {}) {
  const std::size_t n = y.size();
  auto& p = s.params;
  auto& path = s.path;
  w.jumps.resize(n);
  w.probs.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) w.jumps[t] = cfg.jumps_enabled ? path.jump(t) : 0.0;

  p.mu = sample_mu(y, w.jumps, path.lambda, path.gamma, cfg.priors, rng);

  forward_filter_into(y, p.mu, w.jumps, path.gamma, cfg.omega, cfg.a0, cfg.b0, w.filter);
  backward_sample_into(w.filter, cfg.omega, rng, path.lambda);

  path.gamma = sample_gamma_path(y, p.mu, w.jumps, path.lambda, cfg, rng);

  if (!cfg.jumps_enabled) return;

  const auto sizes = xi_at_jumps(path.xi, path.jump_ind);
  p.mu_y = sample_jump_mean(sizes, p.sigma2_y, cfg.priors, rng);
  p.sigma2_y = sample_jump_var(sizes, p.mu_y, cfg.priors, rng);

  path.xi = sample_jump_sizes(y, p.mu, path.lambda, path.gamma, p.mu_y, p.sigma2_y, rng);
  w.probs = jump_indicator_probs(y, p.mu, path.lambda, path.gamma, path.xi, p.rho_y);
  if (opt.update_indicators) path.jump_ind = apply_jump_threshold(w.probs, cfg.jump_threshold);
  for (std::size_t t = 0; t < n; ++t) w.jumps[t] = path.jump(t);

  p.rho_y = sample_rho(path.jump_ind, cfg.priors, rng);
}

/// mu = sample mean, lambda = 1 / sample variance (1 if the variance is
/// negligible), gamma = 1, no jumps, and prior means / modes for the jump
/// parameters (sigma2_y starts at the inverse-gamma mode).
inline ChainState default_init(const ReturnsSeries& y, const ModelConfig& cfg) {
  const auto v = y.values();
  ChainState s{StaticParams{}, LatentPath(v.size())};
  const double mean = mean_of(v);
  s.params.mu = std::isfinite(mean) ? mean : 0.0;
  const double var = variance_of(v);
  const double lam = var > 1e-12 && std::isfinite(var) ? 1.0 / var : 1.0;
  std::fill(s.path.lambda.begin(), s.path.lambda.end(), lam);
  const auto& pr = cfg.priors;
  s.params.rho_y = pr.rho_a / (pr.rho_a + pr.rho_b);
  s.params.mu_y = pr.jumpmean_mean;
  double s2 = pr.jumpvar_scale / (pr.jumpvar_shape + 1.0);
  if (!(s2 > 0.0) || !std::isfinite(s2)) s2 = 1.0;
  s.params.sigma2_y = s2;
  return s;
}

/// Overdispersed start around default_init for the extra chains of run_multi.
inline ChainState dispersed_init(const ReturnsSeries& y, const ModelConfig& cfg, RngStream& rng) {
  ChainState s = default_init(y, cfg);
  double var = variance_of(y.values());
  if (!(var > 1e-12 && std::isfinite(var))) var = 1.0;
  const double sd = std::sqrt(var);
  s.params.mu += sd * rng.standard_normal();
  const double scale = std::exp(rng.standard_normal());
  for (auto& lam : s.path.lambda) lam *= scale;
  const auto& pr = cfg.priors;
  s.params.rho_y = sample_beta(pr.rho_a, pr.rho_b, rng);
  s.params.mu_y = sample_normal(pr.jumpmean_mean, std::min(pr.jumpmean_var, 16.0), rng);
  s.params.sigma2_y = var * std::pow(10.0, 2.0 * rng.uniform() - 1.0) * 4.0;
  return s;
}

namespace detail {

inline void check_start(const ChainState& s, std::size_t n) {
  const auto& p = s.path;
  if (p.lambda.size() != n || p.gamma.size() != n || p.xi.size() != n || p.jump_ind.size() != n)
    throw ConfigError("initial latent path length differs from the series length");
  for (std::size_t t = 0; t < n; ++t) {
    if (!(p.lambda[t] > 0.0) || !(p.gamma[t] > 0.0))
      throw ConfigError("initial lambda and gamma must be positive");
    if (p.jump_ind[t] != 0 && p.jump_ind[t] != 1) throw ConfigError("initial jump indicators must be 0 or 1");
  }
  if (!std::isfinite(s.params.mu)) throw ConfigError("initial mu must be finite");
  if (!(s.params.sigma2_y > 0.0)) throw ConfigError("initial sigma2_y must be positive");
  if (!(s.params.rho_y >= 0.0 && s.params.rho_y <= 1.0)) throw ConfigError("initial rho_y must lie in [0, 1]");
}

inline bool state_is_finite(const ChainState& s, bool jumps) {
  if (!std::isfinite(s.params.mu)) return false;
  const double lam0 = s.path.lambda.front();
  if (!(lam0 > 0.0) || !std::isfinite(lam0)) return false;
  if (jumps && (!(s.params.sigma2_y > 0.0) || !std::isfinite(s.params.sigma2_y) || !std::isfinite(s.params.mu_y)))
    return false;
  return true;
}

}  // namespace detail

inline ChainOutput run_chain(const ReturnsSeries& y, const ModelConfig& cfg, const RunSpec& spec,
                             std::uint64_t chain_id = 0) {
  cfg.validate();
  spec.validate();
  const auto data = y.values();
  const std::size_t n = data.size();
  if (n < 2) throw SizeError("run_chain: at least 2 returns are required");

  RngStream rng(spec.seed, chain_id);
  ChainState state;
  if (chain_id < spec.init.size()) {
    state = spec.init[chain_id];
  } else if (chain_id == 0) {
    state = default_init(y, cfg);
  } else {
    state = dispersed_init(y, cfg, rng);
  }
  if (!cfg.jumps_enabled) {
    std::fill(state.path.xi.begin(), state.path.xi.end(), 0.0);
    std::fill(state.path.jump_ind.begin(), state.path.jump_ind.end(), 0);
  }
  detail::check_start(state, n);

  ChainOutput out;
  out.meta = {spec.seed, chain_id, spec.iterations, spec.burn_in, spec.thin_lag, cfg.jumps_enabled};
  out.start = state;
  const std::size_t keep = spec.retained();
  const bool store_paths = keep * n <= spec.path_budget;
  out.iteration.reserve(keep);
  out.params.reserve(keep);
  out.log_lik.reserve(keep);
  if (store_paths) out.paths.reserve(keep);
  out.summary = LatentSummary(n, keep * spec.n_chains);

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  SweepScratch scratch;
  for (std::size_t j = 1; j <= spec.iterations; ++j) {
    try {
      gibbs_sweep(data, cfg, state, rng, scratch);
    } catch (const DomainError& e) {
      throw NumericalError(std::string("sampler failed: ") + e.what(), j);
    }
    if (!detail::state_is_finite(state, cfg.jumps_enabled)) throw NumericalError("non-finite chain state", j);

    if (j <= spec.burn_in || (j - spec.burn_in) % spec.thin_lag != 0) continue;
    StaticParams p = state.params;
    if (!cfg.jumps_enabled) p.rho_y = p.mu_y = p.sigma2_y = nan;
    out.iteration.push_back(j);
    out.params.push_back(p);
    out.log_lik.push_back(conditional_log_lik(data, state.params.mu, scratch.jumps, state.path.lambda,
                                              state.path.gamma));
    out.summary.add(state.path, scratch.probs);
    if (store_paths) out.paths.push_back(state.path);
  }
  return out;
}

/// Independent chains on separate RNG streams (stream id = chain id), one
/// thread each. Results are ordered by chain id.
inline std::vector<ChainOutput> run_multi(const ReturnsSeries& y, const ModelConfig& cfg, const RunSpec& spec) {
  cfg.validate();
  spec.validate();
  std::vector<ChainOutput> out(spec.n_chains);
  std::vector<std::exception_ptr> errors(spec.n_chains);
  if (spec.n_chains == 1) {
    out[0] = run_chain(y, cfg, spec, 0);
    return out;
  }
  {
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < spec.n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          out[c] = run_chain(y, cfg, spec, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Summary rows pooled over chains, with exact pooled tail quantiles.
inline std::vector<LatentSummary::Row> pooled_rows(const std::vector<ChainOutput>& chains) {
  if (chains.empty()) throw SizeError("pooled_rows: no chains");
  if (chains.size() == 1) return chains.front().summary.rows();
  const std::size_t n = chains.front().summary.size();
  std::vector<LatentSummary::Row> pooled(n, LatentSummary::Row{});
  double total = 0.0;
  for (const auto& c : chains) total += static_cast<double>(c.summary.draws());
  // pooled variance via the law of total variance
  std::vector<double> second_moment(n, 0.0);
  for (const auto& c : chains) {
    const double w = static_cast<double>(c.summary.draws()) / total;
    const double k = static_cast<double>(c.summary.draws());
    for (std::size_t t = 0; t < n; ++t) {
      const auto r = c.summary.row(t);
      auto& p = pooled[t];
      p.mean_lambda += w * r.mean_lambda;
      p.mean_gamma += w * r.mean_gamma;
      p.mean_jump += w * r.mean_jump;
      p.mean_var += w * r.mean_var;
      p.mean_sd += w * r.mean_sd;
      p.jump_prob += w * r.jump_prob;
      p.jump_freq += w * r.jump_freq;
      const double within = k > 1 ? r.sd_var * r.sd_var * (k - 1.0) / k : 0.0;
      second_moment[t] += w * (within + r.mean_var * r.mean_var);
    }
  }
  std::vector<const TailQuantiles*> parts(chains.size());
  for (std::size_t t = 0; t < n; ++t) {
    auto& p = pooled[t];
    const double pop_var = std::max(0.0, second_moment[t] - p.mean_var * p.mean_var);
    p.sd_var = total > 1 ? std::sqrt(pop_var * total / (total - 1.0)) : 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) parts[c] = &chains[c].summary.tails(t);
    std::tie(p.var_lo, p.var_hi) = TailQuantiles::pooled(parts);
    p.sd_lo = std::sqrt(p.var_lo);
    p.sd_hi = std::sqrt(p.var_hi);
  }
  return pooled;
}

}  // namespace ngsvj
