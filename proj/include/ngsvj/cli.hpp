#pragma once

// Command-line front end: fit, simulate, diagnose, summarize.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical abort.
// `fit --config FILE` reads flat `key = value` lines whose keys are the long
// flag names; flags given on the command line win over the file, and the
// file wins over built-in defaults.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ngsvj/diagnostics.hpp"
#include "ngsvj/errors.hpp"
#include "ngsvj/gibbs.hpp"
#include "ngsvj/io.hpp"
#include "ngsvj/model.hpp"
#include "ngsvj/report.hpp"
#include "ngsvj/synthetic.hpp"

namespace ngsvj::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

struct FitResult {
  ModelConfig config;
  RunSpec run;
  io::DescriptiveStats data_stats;
  DiagnosticsReport report;
  std::filesystem::path draws_path;
  std::filesystem::path summary_path;
  std::filesystem::path report_path;
  double wall_seconds = 0.0;
};

inline nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["nu"] = c.nu;
  j["omega"] = c.omega;
  j["threshold"] = c.jump_threshold;
  j["a0"] = c.a0;
  j["b0"] = c.b0;
  j["jumps_enabled"] = c.jumps_enabled;
  const auto& p = c.priors;
  j["priors"] = {{"mu_mean", p.mu_mean},           {"mu_var", p.mu_var},
                 {"jumpmean_mean", p.jumpmean_mean}, {"jumpmean_var", p.jumpmean_var},
                 {"jumpvar_shape", p.jumpvar_shape}, {"jumpvar_scale", p.jumpvar_scale},
                 {"rho_a", p.rho_a},                 {"rho_b", p.rho_b}};
  return j;
}

inline nlohmann::ordered_json stats_to_json(const io::DescriptiveStats& d) {
  return {{"n", d.n},           {"mean", d.mean},         {"variance", d.variance}, {"skewness", d.skewness},
          {"kurtosis", d.kurtosis}, {"min", d.min},     {"max", d.max}};
}

inline nlohmann::ordered_json sim_config_to_json(const SimConfig& s) {
  return {{"n", s.n},         {"mu", s.mu},           {"rho_y", s.rho_y}, {"mu_y", s.mu_y},
          {"sigma_y", s.sigma_y}, {"nu", s.nu},       {"delta", s.delta}, {"theta", s.theta},
          {"kappa", s.kappa}, {"sigma_v", s.sigma_v}, {"corr", s.corr},   {"v0", s.initial_volatility()},
          {"seed", s.seed}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Runs the chains, writes draws.csv, latent_summary.csv and report.json
/// into output_dir, and returns what was written.
inline FitResult fit(const ReturnsSeries& y, const ModelConfig& cfg, const RunSpec& spec,
                     const std::filesystem::path& output_dir, long long k) {
  const auto started = std::chrono::steady_clock::now();
  FitResult res;
  res.config = cfg;
  res.run = spec;
  res.data_stats = io::describe(y.values());
  const auto chains = run_multi(y, cfg, spec);
  const auto draws = io::DrawsTable::from_chains(chains);
  const auto rows = pooled_rows(chains);
  res.report = make_report(y.values(), draws, rows, k);

  std::filesystem::create_directories(output_dir);
  res.draws_path = output_dir / "draws.csv";
  res.summary_path = output_dir / "latent_summary.csv";
  res.report_path = output_dir / "report.json";
  io::write_draws_csv(res.draws_path.string(), draws);
  io::write_latent_summary_csv(res.summary_path.string(), y, rows);

  nlohmann::ordered_json j;
  j["config"] = config_to_json(cfg);
  j["run"] = {{"iterations", spec.iterations}, {"burn_in", spec.burn_in}, {"thin", spec.thin_lag},
              {"chains", spec.n_chains},       {"seed", spec.seed},       {"retained_per_chain", spec.retained()}};
  j["data"] = stats_to_json(res.data_stats);
  j["diagnostics"] = report_to_json(res.report);
  j["files"] = {{"draws", "draws.csv"}, {"latent_summary", "latent_summary.csv"}};
  write_json(res.report_path, j);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return res;
}

namespace detail {

// Expands `--config FILE` into `--key value` arguments placed ahead of the
// command-line flags; the last occurrence of a flag wins.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> head, rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file path");
      config_path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  if (config_path.empty()) return args;
  // the subcommand name stays first so the injected flags bind to it
  std::vector<std::string> out;
  if (!rest.empty()) out.push_back(rest.front());
  for (const auto& [key, value] : io::read_config_file(config_path)) {
    if (key == "no-jumps") {
      if (value == "true" || value == "1" || value == "yes") out.push_back("--no-jumps");
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  out.insert(out.end(), rest.begin() + (rest.empty() ? 0 : 1), rest.end());
  return out;
}

inline void print_report(std::ostream& out, const DiagnosticsReport& r) {
  out << std::setprecision(6);
  out << (r.jumps_enabled ? "NGSVJ" : "NGSSM") << ": n=" << r.n << " draws=" << r.draws << " chains=" << r.chains
      << '\n';
  out << "  log L (max)=" << r.log_lik_max << "  log L (at mean)=" << r.log_lik_at_mean << '\n';
  out << "  BIC=" << r.bic << " (k=" << r.k << ")  DIC=" << r.dic << "  pD=" << r.p_d << '\n';
  for (const auto& p : r.per_param)
    out << "  " << std::left << std::setw(9) << p.name << std::right << " mean=" << p.mean << " sd=" << p.sd
        << " mcse=" << p.mcse << " ess=" << p.ess << " psrf=" << p.psrf << '\n';
}

}  // namespace detail

inline int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic volatility with jumps in returns: Gibbs sampler and tools", "ngsvj"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit the model to a returns or prices CSV");
  fit_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  std::string input, mode = "returns", output_dir = "ngsvj_out";
  ModelConfig cfg = default_config();
  RunSpec spec;
  spec.iterations = 10000;
  spec.burn_in = 2000;
  spec.thin_lag = 1;
  bool no_jumps = false;
  long long k_override = 0;
  fit_cmd->add_option("--input", input, "CSV file with timestamp,price or timestamp,log_return_pct")->required();
  fit_cmd->add_option("--mode", mode, "prices or returns")->check(CLI::IsMember({"prices", "returns"}));
  fit_cmd->add_option("--nu", cfg.nu, "Student-t degrees of freedom");
  fit_cmd->add_option("--omega", cfg.omega, "discount factor in (0, 1]");
  fit_cmd->add_option("--threshold", cfg.jump_threshold, "jump probability threshold");
  fit_cmd->add_option("--a0", cfg.a0, "initial filter shape");
  fit_cmd->add_option("--b0", cfg.b0, "initial filter rate");
  fit_cmd->add_option("--mu-mean", cfg.priors.mu_mean, "prior mean of mu");
  fit_cmd->add_option("--mu-var", cfg.priors.mu_var, "prior variance of mu");
  fit_cmd->add_option("--jump-mean-mean", cfg.priors.jumpmean_mean, "prior mean of mu_y");
  fit_cmd->add_option("--jump-mean-var", cfg.priors.jumpmean_var, "prior variance of mu_y");
  fit_cmd->add_option("--jump-var-shape", cfg.priors.jumpvar_shape, "inverse-gamma shape for sigma2_y");
  fit_cmd->add_option("--jump-var-scale", cfg.priors.jumpvar_scale, "inverse-gamma scale for sigma2_y");
  fit_cmd->add_option("--rho-a", cfg.priors.rho_a, "Beta prior a for rho_y");
  fit_cmd->add_option("--rho-b", cfg.priors.rho_b, "Beta prior b for rho_y");
  fit_cmd->add_option("--iterations", spec.iterations, "total Gibbs iterations per chain");
  fit_cmd->add_option("--burn-in", spec.burn_in, "discarded initial iterations");
  fit_cmd->add_option("--thin", spec.thin_lag, "retention lag");
  fit_cmd->add_option("--chains", spec.n_chains, "number of chains");
  fit_cmd->add_option("--seed", spec.seed, "RNG seed");
  fit_cmd->add_option("--path-budget", spec.path_budget, "max draws x n kept as full latent paths");
  fit_cmd->add_option("--k", k_override, "parameter count for BIC")->default_str("8, or 4 with --no-jumps");
  fit_cmd->add_flag("--no-jumps", no_jumps, "fit the jump-free model");
  fit_cmd->add_option("--output-dir", output_dir, "directory for draws.csv, latent_summary.csv, report.json");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic returns with known volatility and jumps");
  sim_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  SimConfig sc;
  double v0 = -1.0;
  std::string sim_output, sim_config_out;
  sim_cmd->add_option("--n", sc.n, "series length");
  sim_cmd->add_option("--mu", sc.mu, "return drift");
  sim_cmd->add_option("--rho-y", sc.rho_y, "jump probability per step");
  sim_cmd->add_option("--mu-y", sc.mu_y, "mean jump size");
  sim_cmd->add_option("--sigma-y", sc.sigma_y, "jump size standard deviation");
  sim_cmd->add_option("--nu", sc.nu, "Student-t degrees of freedom");
  sim_cmd->add_option("--delta", sc.delta, "time step");
  sim_cmd->add_option("--theta", sc.theta, "long-run volatility level");
  sim_cmd->add_option("--kappa", sc.kappa, "mean-reversion speed");
  sim_cmd->add_option("--sigma-v", sc.sigma_v, "volatility of volatility");
  sim_cmd->add_option("--corr", sc.corr, "shock correlation");
  sim_cmd->add_option("--v0", v0, "initial volatility")->default_str("theta");
  sim_cmd->add_option("--seed", sc.seed, "RNG seed");
  sim_cmd->add_option("--output", sim_output, "CSV path")->required();
  sim_cmd->add_option("--config-out", sim_config_out, "optional JSON echo of the simulation settings");

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "Recompute BIC/DIC, ESS and PSRF from a fit directory");
  std::string diag_dir, diag_output;
  long long diag_k = 0;
  diag_cmd->add_option("--fit-dir", diag_dir, "directory holding draws.csv and latent_summary.csv")->required();
  diag_cmd->add_option("--k", diag_k, "parameter count for BIC");
  diag_cmd->add_option("--output", diag_output, "report path (default FIT_DIR/diagnostics.json)");

  // summarize
  auto* sum_cmd = app.add_subcommand("summarize", "Compare a fit against simulated truth");
  std::string truth_path, sum_dir, sum_sim_config, sum_output_dir;
  sum_cmd->add_option("--truth", truth_path, "simulate output CSV")->required();
  sum_cmd->add_option("--fit-dir", sum_dir, "fit output directory")->required();
  sum_cmd->add_option("--sim-config", sum_sim_config, "JSON written by simulate --config-out");
  sum_cmd->add_option("--output-dir", sum_output_dir, "where to write tables (default FIT_DIR)");

  try {
    auto args = detail::expand_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes vectors from the back
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      cfg.jumps_enabled = !no_jumps;
      cfg.validate();
      spec.validate();
      const auto series = io::ingest_csv(input, io::parse_mode(mode));
      if (series.size() < 2) throw SizeError("need at least 2 returns to fit");
      const long long k = k_override > 0 ? k_override : default_bic_params(cfg.jumps_enabled);
      const auto res = fit(series, cfg, spec, output_dir, k);
      const auto& d = res.data_stats;
      out << std::setprecision(6) << "data: n=" << d.n << " mean=" << d.mean << " variance=" << d.variance
          << " skewness=" << d.skewness << " kurtosis=" << d.kurtosis << " min=" << d.min << " max=" << d.max << '\n';
      detail::print_report(out, res.report);
      out << "wrote " << res.draws_path.string() << ", " << res.summary_path.string() << ", "
          << res.report_path.string() << '\n';
      err << "elapsed " << std::setprecision(4) << res.wall_seconds << " s\n";
      return kOk;
    }
    if (sim_cmd->parsed()) {
      if (v0 > 0.0) sc.v0 = v0;
      const auto sim = simulate(sc);
      io::write_sim_csv(sim_output, sim);
      if (!sim_config_out.empty()) write_json(sim_config_out, sim_config_to_json(sc));
      out << "wrote " << sc.n << " rows to " << sim_output << '\n';
      return kOk;
    }
    if (diag_cmd->parsed()) {
      const std::filesystem::path dir(diag_dir);
      const auto draws = io::read_draws_csv((dir / "draws.csv").string());
      const auto latent = io::read_latent_summary_csv((dir / "latent_summary.csv").string());
      const long long k = diag_k > 0 ? diag_k : default_bic_params(draws.jumps_enabled);
      const auto rep = make_report(latent.y, draws, latent.rows, k);
      const std::filesystem::path target = diag_output.empty() ? dir / "diagnostics.json" : std::filesystem::path(diag_output);
      write_json(target, report_to_json(rep));
      detail::print_report(out, rep);
      return kOk;
    }
    if (sum_cmd->parsed()) {
      const std::filesystem::path dir(sum_dir);
      const std::filesystem::path target = sum_output_dir.empty() ? dir : std::filesystem::path(sum_output_dir);
      std::filesystem::create_directories(target);
      const auto truth = io::read_sim_csv(truth_path);
      const auto latent = io::read_latent_summary_csv((dir / "latent_summary.csv").string());
      const auto draws = io::read_draws_csv((dir / "draws.csv").string());
      if (latent.rows.size() != truth.returns.size())
        throw SizeError("summarize: truth and fit have different lengths");
      const std::size_t n = latent.rows.size();
      std::vector<double> mean_var(n), lo(n), hi(n), mean_jump(n);
      for (std::size_t t = 0; t < n; ++t) {
        mean_var[t] = latent.rows[t].mean_var;
        lo[t] = latent.rows[t].var_lo;
        hi[t] = latent.rows[t].var_hi;
        mean_jump[t] = latent.rows[t].mean_jump;
      }
      nlohmann::ordered_json j;
      j["n"] = n;
      j["volatility_coverage_95"] = coverage(truth.true_volatility, lo, hi);
      j["volatility_rmse"] = rmse(mean_var, truth.true_volatility);
      j["jump_rmse"] = rmse(mean_jump, truth.true_jumps);
      std::size_t true_jumps = 0, caught = 0, flagged = 0;
      for (std::size_t t = 0; t < n; ++t) {
        const bool is_flagged = latent.rows[t].jump_freq > 0.5;
        true_jumps += static_cast<std::size_t>(truth.true_jump_times[t]);
        flagged += is_flagged;
        caught += is_flagged && truth.true_jump_times[t];
      }
      j["true_jumps"] = true_jumps;
      j["flagged_jumps"] = flagged;
      j["flagged_true_jumps"] = caught;

      {
        std::ofstream vc(target / "volatility_comparison.csv", std::ios::binary);
        vc << "t,true_v,mean_var,var_q025,var_q975,true_jump,mean_jump\n";
        for (std::size_t t = 0; t < n; ++t)
          vc << (t + 1) << ',' << io::format_double(truth.true_volatility[t]) << ',' << io::format_double(mean_var[t])
             << ',' << io::format_double(lo[t]) << ',' << io::format_double(hi[t]) << ','
             << io::format_double(truth.true_jumps[t]) << ',' << io::format_double(mean_jump[t]) << '\n';
      }

      if (!sum_sim_config.empty()) {
        std::ifstream in(sum_sim_config);
        if (!in) throw ParseError("cannot open " + sum_sim_config);
        nlohmann::json sim_json;
        try {
          sim_json = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw ParseError(sum_sim_config + ": " + e.what());
        }
        struct Entry {
          const char* name;
          double truth;
          double (*get)(const StaticParams&);
        };
        std::vector<Entry> entries{{"mu", sim_json.at("mu").get<double>(), [](const StaticParams& p) { return p.mu; }}};
        if (draws.jumps_enabled) {
          entries.push_back({"rho_y", sim_json.at("rho_y").get<double>(), [](const StaticParams& p) { return p.rho_y; }});
          entries.push_back({"mu_y", sim_json.at("mu_y").get<double>(), [](const StaticParams& p) { return p.mu_y; }});
          entries.push_back({"sigma_y", sim_json.at("sigma_y").get<double>(),
                             [](const StaticParams& p) { return std::sqrt(p.sigma2_y); }});
        }
        std::ofstream ss(target / "static_summary.csv", std::ios::binary);
        ss << "param,true,mean,sd,rmse\n";
        auto table = nlohmann::ordered_json::array();
        for (const auto& e : entries) {
          std::vector<double> vals(draws.size());
          for (std::size_t i = 0; i < draws.size(); ++i) vals[i] = e.get(draws.params[i]);
          const std::vector<double> truth_vals(vals.size(), e.truth);
          const double m = mean_of(vals), sd = std::sqrt(variance_of(vals)), r = rmse(vals, truth_vals);
          ss << e.name << ',' << io::format_double(e.truth) << ',' << io::format_double(m) << ','
             << io::format_double(sd) << ',' << io::format_double(r) << '\n';
          table.push_back({{"param", e.name}, {"true", e.truth}, {"mean", m}, {"sd", sd}, {"rmse", r}});
        }
        j["static"] = std::move(table);
      }
      write_json(target / "summary.json", j);
      out << "coverage=" << j["volatility_coverage_95"].get<double>() << " volatility_rmse="
          << j["volatility_rmse"].get<double>() << " jump_rmse=" << j["jump_rmse"].get<double>() << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kNumerical;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const SizeError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace ngsvj::cli
