#pragma once

// Assembles the model-comparison report from retained draws and the pooled
// latent summary. Works the same from in-memory chains or from files read
// back by the CLI.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ngsvj/diagnostics.hpp"
#include "ngsvj/gibbs.hpp"
#include "ngsvj/io.hpp"
#include "ngsvj/model.hpp"

namespace ngsvj {

/// Default BIC parameter counts (jump model / jump-free model).
inline constexpr long long kBicParamsJumps = 8;
inline constexpr long long kBicParamsNoJumps = 4;

inline long long default_bic_params(bool jumps_enabled) {
  return jumps_enabled ? kBicParamsJumps : kBicParamsNoJumps;
}

struct ParamSummary {
  std::string name;
  double mean = 0, sd = 0, mcse = 0, ess = 0, psrf = 1;
};

struct TimeSummary {
  std::size_t t = 0;
  double mean_var = 0, var_lo = 0, var_hi = 0, mean_jump = 0, jump_prob = 0;
};

struct DiagnosticsReport {
  bool jumps_enabled = true;
  std::size_t n = 0;
  std::size_t draws = 0;
  std::size_t chains = 0;
  long long k = 0;
  double log_lik_max = 0;      // L-hat used by BIC
  double log_lik_at_mean = 0;  // ln p(y | Phi-bar)
  double deviance_at_mean = 0;
  double mean_deviance = 0;
  double p_d = 0;
  double dic = 0;
  double bic = 0;
  std::vector<ParamSummary> per_param;
  std::vector<TimeSummary> per_t;

  const ParamSummary* param(std::string_view name) const {
    for (const auto& p : per_param)
      if (p.name == name) return &p;
    return nullptr;
  }
};

namespace detail {

inline ParamSummary summarize_param(std::string name, const std::vector<std::vector<double>>& per_chain) {
  ParamSummary s;
  s.name = std::move(name);
  std::vector<double> all;
  double ess_total = 0.0;
  for (const auto& c : per_chain) {
    all.insert(all.end(), c.begin(), c.end());
    ess_total += c.size() >= 4 ? ess(c) : static_cast<double>(c.size());
  }
  s.mean = mean_of(all);
  s.sd = std::sqrt(variance_of(all));
  s.ess = ess_total;
  s.mcse = ess_total > 0 ? s.sd / std::sqrt(ess_total) : std::numeric_limits<double>::quiet_NaN();
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& c : per_chain) shortest = std::min(shortest, c.size());
  s.psrf = shortest >= 4 ? psrf(per_chain) : std::numeric_limits<double>::quiet_NaN();
  return s;
}

}  // namespace detail

/// Builds the report. `rows` are pooled per-t summaries aligned with y.
/// DIC plugs the element-wise posterior means of mu, lambda, gamma and J
/// into the conditional likelihood; BIC uses the largest per-draw value.
inline DiagnosticsReport make_report(std::span<const double> y, const io::DrawsTable& draws,
                                     const std::vector<LatentSummary::Row>& rows, long long k) {
  if (draws.size() == 0) throw SizeError("make_report: no draws");
  if (rows.size() != y.size()) throw SizeError("make_report: summary rows differ from series length");
  DiagnosticsReport rep;
  rep.jumps_enabled = draws.jumps_enabled;
  rep.n = y.size();
  rep.draws = draws.size();
  rep.k = k;

  std::vector<double> deviance(draws.size());
  rep.log_lik_max = -std::numeric_limits<double>::infinity();
  double mu_bar = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    deviance[i] = -2.0 * draws.log_lik[i];
    rep.log_lik_max = std::max(rep.log_lik_max, draws.log_lik[i]);
    mu_bar += draws.params[i].mu;
  }
  mu_bar /= static_cast<double>(draws.size());

  std::vector<double> jbar(rows.size()), lbar(rows.size()), gbar(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    jbar[t] = rows[t].mean_jump;
    lbar[t] = rows[t].mean_lambda;
    gbar[t] = rows[t].mean_gamma;
  }
  rep.log_lik_at_mean = conditional_log_lik(y, mu_bar, jbar, lbar, gbar);
  rep.deviance_at_mean = -2.0 * rep.log_lik_at_mean;
  const auto dic = compute_dic(deviance, rep.deviance_at_mean);
  rep.dic = dic.dic;
  rep.p_d = dic.p_d;
  rep.mean_deviance = dic.mean_deviance;
  rep.bic = compute_bic(rep.log_lik_max, k, static_cast<long long>(y.size()));

  const auto ids = draws.chain_ids();
  rep.chains = ids.size();
  auto traces = [&](auto getter) {
    std::vector<std::vector<double>> per_chain(ids.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
      const auto pos = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), draws.chain[i]) - ids.begin());
      per_chain[pos].push_back(getter(i));
    }
    return per_chain;
  };
  rep.per_param.push_back(detail::summarize_param("mu", traces([&](std::size_t i) { return draws.params[i].mu; })));
  if (draws.jumps_enabled) {
    rep.per_param.push_back(
        detail::summarize_param("rho_y", traces([&](std::size_t i) { return draws.params[i].rho_y; })));
    rep.per_param.push_back(
        detail::summarize_param("mu_y", traces([&](std::size_t i) { return draws.params[i].mu_y; })));
    rep.per_param.push_back(
        detail::summarize_param("sigma2_y", traces([&](std::size_t i) { return draws.params[i].sigma2_y; })));
    rep.per_param.push_back(detail::summarize_param(
        "sigma_y", traces([&](std::size_t i) { return std::sqrt(draws.params[i].sigma2_y); })));
  }
  rep.per_param.push_back(
      detail::summarize_param("log_lik", traces([&](std::size_t i) { return draws.log_lik[i]; })));

  rep.per_t.reserve(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    rep.per_t.push_back({t + 1, rows[t].mean_var, rows[t].var_lo, rows[t].var_hi, rows[t].mean_jump, rows[t].jump_prob});
  return rep;
}

inline DiagnosticsReport make_report(const ReturnsSeries& y, const std::vector<ChainOutput>& chains, long long k) {
  return make_report(y.values(), io::DrawsTable::from_chains(chains), pooled_rows(chains), k);
}

/// JSON form of the report; per-t rows are left to latent_summary.csv.
inline nlohmann::ordered_json report_to_json(const DiagnosticsReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.jumps_enabled ? "NGSVJ" : "NGSSM";
  j["n"] = r.n;
  j["draws"] = r.draws;
  j["chains"] = r.chains;
  j["k"] = r.k;
  j["log_lik_max"] = r.log_lik_max;
  j["log_lik_at_mean"] = r.log_lik_at_mean;
  j["deviance_at_mean"] = r.deviance_at_mean;
  j["mean_deviance"] = r.mean_deviance;
  j["p_d"] = r.p_d;
  j["dic"] = r.dic;
  j["bic"] = r.bic;
  auto params = nlohmann::ordered_json::array();
  for (const auto& p : r.per_param) {
    nlohmann::ordered_json e;
    e["name"] = p.name;
    e["mean"] = p.mean;
    e["sd"] = p.sd;
    e["mcse"] = p.mcse;
    e["ess"] = p.ess;
    e["psrf"] = p.psrf;
    params.push_back(std::move(e));
  }
  j["parameters"] = std::move(params);
  return j;
}

}  // namespace ngsvj
