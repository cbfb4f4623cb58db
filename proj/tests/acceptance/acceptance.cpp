#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "conjugacy_oracles.hpp"
#include "geweke.hpp"
#include "ngsvj/gibbs.hpp"
#include "ngsvj/report.hpp"
#include "ngsvj/synthetic.hpp"
#include "test_support.hpp"

using namespace ngsvj;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("%s C%d %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean_var(const std::vector<LatentSummary::Row>& rows) {
  double s = 0.0;
  for (const auto& r : rows) s += r.mean_var;
  return s / static_cast<double>(rows.size());
}

double within_pct(double value, double target) { return 100.0 * std::abs(value - target) / target; }

void recovery_and_comparison() {
  const auto sc = reference_sim_config(5000, 1);
  const auto sim = simulate(sc);
  RunSpec spec;
  spec.iterations = 30000;
  spec.burn_in = 6000;
  spec.thin_lag = 3;
  spec.seed = 1;

  auto t0 = std::chrono::steady_clock::now();
  const auto jumps = run_multi(sim.returns, default_config(), spec);
  const double fit_seconds = seconds_since(t0);
  const auto rep = make_report(sim.returns, jumps, kBicParamsJumps);
  const auto rows = pooled_rows(jumps);

  auto no_jump_cfg = default_config();
  no_jump_cfg.jumps_enabled = false;
  const auto plain = run_multi(sim.returns, no_jump_cfg, spec);
  const auto plain_rep = make_report(sim.returns, plain, kBicParamsNoJumps);
  const auto plain_rows = pooled_rows(plain);

  const double mu = rep.param("mu")->mean, rho = rep.param("rho_y")->mean;
  const double mu_y = rep.param("mu_y")->mean, sigma_y = rep.param("sigma_y")->mean;
  const bool recovered = std::abs(mu - sc.mu) <= 0.011 && std::abs(rho - sc.rho_y) <= 0.0072 &&
                         std::abs(mu_y - sc.mu_y) <= 1.9 && std::abs(sigma_y - sc.sigma_y) <= 2.3;
  verdict(1, recovered && fit_seconds <= 900.0,
          fmt("recovery: mu %.4f (|err| %.4f <= 0.011), rho_y %.4f (%.4f <= 0.0072), mu_y %.3f (%.3f <= 1.9), "
              "sigma_y %.3f (%.3f <= 2.3); fit %.1f s",
              mu, std::abs(mu - sc.mu), rho, std::abs(rho - sc.rho_y), mu_y, std::abs(mu_y - sc.mu_y), sigma_y,
              std::abs(sigma_y - sc.sigma_y), fit_seconds));

  std::vector<double> lo, hi;
  for (const auto& r : rows) {
    lo.push_back(r.var_lo);
    hi.push_back(r.var_hi);
  }
  const double cov = coverage(sim.true_volatility, lo, hi);
  verdict(2, cov >= 0.90, fmt("coverage of true v_t by 95%% band: %.4f (>= 0.90)", cov));

  verdict(3, rep.bic < plain_rep.bic && rep.dic < plain_rep.dic,
          fmt("BIC %.1f < %.1f, DIC %.1f < %.1f; vs reference 11634/12669 BIC off %.1f%%/%.1f%%, "
              "12139/13938 DIC off %.1f%%/%.1f%%",
              rep.bic, plain_rep.bic, rep.dic, plain_rep.dic, within_pct(rep.bic, 11634), within_pct(plain_rep.bic, 12669),
              within_pct(rep.dic, 12139), within_pct(plain_rep.dic, 13938)));

  const double v_jumps = mean_var(rows), v_plain = mean_var(plain_rows);
  verdict(4, v_jumps <= v_plain, fmt("mean posterior variance with jumps %.4f <= without %.4f", v_jumps, v_plain));
}

void conjugacy() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = oracles::randomized_suite(20261015);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& r : results)
    if (!(r.tv <= worst)) {
      worst = r.tv;
      worst_name = r.name;
    }
  verdict(5, worst < 1e-4 && secs < 60.0,
          fmt("%zu oracle settings, max TV %.2e (%s) < 1e-4, %.1f s < 60 s", results.size(), worst, worst_name.c_str(),
              secs));
}

void getting_it_right() {
  const auto checks = geweke::run(5000, 50, 20261015);
  bool ok = true;
  std::string detail = "KS p-values vs prior:";
  for (const auto& c : checks) {
    ok = ok && c.p_value > 0.01;
    detail += fmt(" %s %.3f", c.name.c_str(), c.p_value);
  }
  verdict(6, ok, detail + " (all > 0.01)");
}

void convergence() {
  const auto sim = simulate(reference_sim_config(5000, 2));
  RunSpec spec;
  spec.iterations = 1000;
  spec.burn_in = 0;
  spec.n_chains = 3;
  spec.seed = 3;
  const auto chains = run_multi(sim.returns, default_config(), spec);
  const auto rep = make_report(sim.returns, chains, kBicParamsJumps);
  bool ok = true;
  std::string detail = "split-chain PSRF, 3 dispersed chains, 1000 iterations:";
  for (const char* name : {"mu", "rho_y", "mu_y", "sigma2_y"}) {
    const double r = rep.param(name)->psrf;
    ok = ok && r < 1.1;
    detail += fmt(" %s %.4f", name, r);
  }
  verdict(7, ok, detail + " (< 1.1)");
}

void speed() {
  const auto sim = simulate(reference_sim_config(6241, 4));
  RunSpec spec;
  spec.iterations = 10000;
  spec.burn_in = 6000;
  spec.thin_lag = 2;
  spec.seed = 5;
  const auto t0 = std::chrono::steady_clock::now();
  const auto chains = run_multi(sim.returns, default_config(), spec);
  const auto rep = make_report(sim.returns, chains, kBicParamsJumps);
  const double secs = seconds_since(t0);
  verdict(8, secs <= 60.0, fmt("n 6241, 10000 iterations, burn-in 6000, thin 2: %.1f s (<= 60 s)", secs));
}

void determinism() {
  const fs::path root = testing_support::scratch_dir("acceptance_determinism");
  const std::string exe = NGSVJ_CLI_PATH;
  auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()) == 0; };
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    fs::create_directories(dir);
    ok = ok && sh(exe + " simulate --n 1500 --seed 11 --output " + (dir / "sim.csv").string() + " --config-out " +
                  (dir / "sim.json").string());
    ok = ok && sh(exe + " fit --input " + (dir / "sim.csv").string() +
                  " --mode returns --iterations 1500 --burn-in 500 --thin 2 --chains 2 --seed 12 --output-dir " +
                  (dir / "fit").string());
    ok = ok && sh(exe + " diagnose --fit-dir " + (dir / "fit").string());
    ok = ok && sh(exe + " summarize --truth " + (dir / "sim.csv").string() + " --fit-dir " + (dir / "fit").string() +
                  " --sim-config " + (dir / "sim.json").string());
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto other = root / "b" / fs::relative(entry.path(), root / "a");
    const bool same = fs::exists(other) && testing_support::slurp(entry.path()) == testing_support::slurp(other);
    if (!same) std::printf("  differs: %s\n", fs::relative(entry.path(), root / "a").c_str());
    ok = ok && same;
    ++compared;
  }
  ok = ok && compared >= 9;
  verdict(9, ok, fmt("simulate/fit/diagnose/summarize repeated: %zu files byte-identical", compared));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps{recovery_and_comparison, conjugacy, getting_it_right, convergence,
                                                 speed, determinism};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      std::printf("FAIL error: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
