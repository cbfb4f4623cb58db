#pragma once

// CSV ingestion and result files. Doubles are written with 17 significant
// digits through std::to_chars, so output is locale independent and parses
// back to the same value.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ngsvj/diagnostics.hpp"
#include "ngsvj/errors.hpp"
#include "ngsvj/gibbs.hpp"
#include "ngsvj/model.hpp"
#include "ngsvj/synthetic.hpp"

namespace ngsvj::io {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s == "NA" || s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Header plus rows; line numbers are 1-based file lines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name, const std::string& path) const {
    auto c = column(name);
    if (!c) throw ParseError(path + ": missing column '" + std::string(name) + "'", 1);
    return *c;
  }

  double number(std::size_t row, std::size_t col, const std::string& path) const {
    const auto& cells = rows[row];
    if (col >= cells.size()) throw ParseError(path + ": too few columns", line_numbers[row]);
    auto v = parse_double(cells[col]);
    if (!v) throw ParseError(path + ": non-numeric cell '" + cells[col] + "' in column '" + header[col] + "'",
                             line_numbers[row]);
    return *v;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty()) continue;
    auto cells = split_csv_line(view);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw ParseError(path + ": expected " + std::to_string(table.header.size()) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ParseError(path + ": empty file");
  return table;
}

enum class InputMode { Prices, Returns };

inline InputMode parse_mode(std::string_view s) {
  if (s == "prices") return InputMode::Prices;
  if (s == "returns") return InputMode::Returns;
  throw ConfigError("unknown input mode '" + std::string(s) + "' (expected prices or returns)");
}

/// Reads `timestamp,price` (prices mode) or `timestamp,log_return_pct`
/// (returns mode). The timestamp column is optional; a `return` column is
/// accepted in place of `log_return_pct` so simulator output can be fitted
/// directly.
inline ReturnsSeries ingest_csv(const std::string& path, InputMode mode) {
  const CsvTable table = read_csv(path);
  if (table.rows.size() < 2)
    throw ParseError(path + ": need a header and at least 2 data rows, found " + std::to_string(table.rows.size()) +
                     " data rows");
  std::size_t col;
  if (mode == InputMode::Prices) {
    col = table.require_column("price", path);
  } else if (auto c = table.column("log_return_pct")) {
    col = *c;
  } else if (auto r = table.column("return")) {
    col = *r;
  } else {
    throw ParseError(path + ": missing column 'log_return_pct'", 1);
  }
  const auto ts_col = table.column("timestamp");
  std::vector<double> values(table.rows.size());
  std::vector<std::string> stamps;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    values[i] = table.number(i, col, path);
    if (!std::isfinite(values[i])) throw ParseError(path + ": non-finite value", table.line_numbers[i]);
    if (mode == InputMode::Prices && !(values[i] > 0.0))
      throw ParseError(path + ": non-positive price", table.line_numbers[i]);
    if (ts_col) stamps.push_back(table.rows[i][*ts_col]);
  }
  if (mode == InputMode::Prices) {
    auto series = prices_to_returns(values);
    if (!ts_col) return series;
    std::vector<double> r(series.values().begin(), series.values().end());
    return ReturnsSeries(std::move(r), std::vector<std::string>(stamps.begin() + 1, stamps.end()));
  }
  if (!ts_col) return ReturnsSeries(std::move(values));
  return ReturnsSeries(std::move(values), std::move(stamps));
}

/// Sample size, mean, variance (n - 1), skewness and kurtosis (moment
/// ratios, kurtosis not in excess), min and max.
struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0, variance = 0, skewness = 0, kurtosis = 0, min = 0, max = 0;
};

inline DescriptiveStats describe(std::span<const double> x) {
  DescriptiveStats d;
  d.n = x.size();
  d.mean = mean_of(x);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double c = v - d.mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  const double n = static_cast<double>(x.size());
  d.variance = x.size() > 1 ? m2 / (n - 1.0) : 0.0;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  d.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  d.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  d.min = *lo;
  d.max = *hi;
  return d;
}

// ---- flat key = value config files ------------------------------------------

/// `key = value` per line; '#' starts a comment. Keys are normalised to use
/// '-' instead of '_'.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(path + ": expected 'key = value'", line_no);
    std::string key(trim(view.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ParseError(path + ": empty key", line_no);
    out[key] = std::string(trim(view.substr(eq + 1)));
  }
  return out;
}

// ---- draws.csv ---------------------------------------------------------------

struct DrawsTable {
  bool jumps_enabled = true;
  std::vector<std::uint64_t> chain;
  std::vector<std::size_t> iteration;
  std::vector<StaticParams> params;
  std::vector<double> log_lik;

  std::size_t size() const noexcept { return params.size(); }

  std::vector<std::uint64_t> chain_ids() const {
    std::vector<std::uint64_t> ids = chain;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  static DrawsTable from_chains(const std::vector<ChainOutput>& chains) {
    DrawsTable d;
    if (!chains.empty()) d.jumps_enabled = chains.front().meta.jumps_enabled;
    for (const auto& c : chains) {
      for (std::size_t i = 0; i < c.draws(); ++i) {
        d.chain.push_back(c.meta.chain_id);
        d.iteration.push_back(c.iteration[i]);
        d.params.push_back(c.params[i]);
        d.log_lik.push_back(c.log_lik[i]);
      }
    }
    return d;
  }
};

inline void write_draws_csv(const std::string& path, const DrawsTable& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << (d.jumps_enabled ? "chain,iteration,mu,rho_y,mu_y,sigma2_y,sigma_y,log_lik\n" : "chain,iteration,mu,log_lik\n");
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& p = d.params[i];
    out << d.chain[i] << ',' << d.iteration[i] << ',' << format_double(p.mu) << ',';
    if (d.jumps_enabled)
      out << format_double(p.rho_y) << ',' << format_double(p.mu_y) << ',' << format_double(p.sigma2_y) << ','
          << format_double(std::sqrt(p.sigma2_y)) << ',';
    out << format_double(d.log_lik[i]) << '\n';
  }
  if (!out) throw ParseError("failed writing " + path);
}

inline DrawsTable read_draws_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  DrawsTable d;
  d.jumps_enabled = t.column("rho_y").has_value();
  const auto c_chain = t.require_column("chain", path);
  const auto c_iter = t.require_column("iteration", path);
  const auto c_mu = t.require_column("mu", path);
  const auto c_ll = t.require_column("log_lik", path);
  std::size_t c_rho = 0, c_muy = 0, c_s2 = 0;
  if (d.jumps_enabled) {
    c_rho = t.require_column("rho_y", path);
    c_muy = t.require_column("mu_y", path);
    c_s2 = t.require_column("sigma2_y", path);
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double chain = t.number(i, c_chain, path);
    const double iter = t.number(i, c_iter, path);
    if (!(chain >= 0) || !(iter >= 0)) throw ParseError(path + ": negative chain or iteration", t.line_numbers[i]);
    d.chain.push_back(static_cast<std::uint64_t>(chain));
    d.iteration.push_back(static_cast<std::size_t>(iter));
    StaticParams p{t.number(i, c_mu, path), nan, nan, nan};
    if (d.jumps_enabled) {
      p.rho_y = t.number(i, c_rho, path);
      p.mu_y = t.number(i, c_muy, path);
      p.sigma2_y = t.number(i, c_s2, path);
    }
    d.params.push_back(p);
    d.log_lik.push_back(t.number(i, c_ll, path));
  }
  return d;
}

// ---- latent_summary.csv ---------------------------------------------------------

struct LatentTable {
  std::vector<double> y;
  std::vector<LatentSummary::Row> rows;
  std::optional<std::vector<std::string>> timestamps;
};

inline void write_latent_summary_csv(const std::string& path, const ReturnsSeries& y,
                                     const std::vector<LatentSummary::Row>& rows) {
  if (rows.size() != y.size()) throw SizeError("write_latent_summary_csv: row count differs from series length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  const bool stamps = y.timestamps().has_value();
  out << "t,";
  if (stamps) out << "timestamp,";
  out << "y,mean_lambda,mean_gamma,mean_var,sd_var,var_q025,var_q975,mean_sd,sd_q025,sd_q975,mean_jump,jump_prob,"
         "jump_freq\n";
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    out << (t + 1) << ',';
    if (stamps) out << (*y.timestamps())[t] << ',';
    for (double v : {y[t], r.mean_lambda, r.mean_gamma, r.mean_var, r.sd_var, r.var_lo, r.var_hi, r.mean_sd, r.sd_lo,
                     r.sd_hi, r.mean_jump, r.jump_prob})
      out << format_double(v) << ',';
    out << format_double(r.jump_freq) << '\n';
  }
  if (!out) throw ParseError("failed writing " + path);
}

inline LatentTable read_latent_summary_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  LatentTable out;
  const auto col = [&](const char* name) { return t.require_column(name, path); };
  const std::size_t c_y = col("y"), c_l = col("mean_lambda"), c_g = col("mean_gamma"), c_v = col("mean_var"),
                    c_sv = col("sd_var"), c_vlo = col("var_q025"), c_vhi = col("var_q975"), c_sd = col("mean_sd"),
                    c_slo = col("sd_q025"), c_shi = col("sd_q975"), c_j = col("mean_jump"), c_p = col("jump_prob"),
                    c_f = col("jump_freq");
  const auto c_ts = t.column("timestamp");
  if (c_ts) out.timestamps.emplace();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out.y.push_back(t.number(i, c_y, path));
    LatentSummary::Row r{};
    r.mean_lambda = t.number(i, c_l, path);
    r.mean_gamma = t.number(i, c_g, path);
    r.mean_var = t.number(i, c_v, path);
    r.sd_var = t.number(i, c_sv, path);
    r.var_lo = t.number(i, c_vlo, path);
    r.var_hi = t.number(i, c_vhi, path);
    r.mean_sd = t.number(i, c_sd, path);
    r.sd_lo = t.number(i, c_slo, path);
    r.sd_hi = t.number(i, c_shi, path);
    r.mean_jump = t.number(i, c_j, path);
    r.jump_prob = t.number(i, c_p, path);
    r.jump_freq = t.number(i, c_f, path);
    out.rows.push_back(r);
    if (c_ts) out.timestamps->push_back(t.rows[i][*c_ts]);
  }
  return out;
}

// ---- simulator output ------------------------------------------------------------

inline void write_sim_csv(const std::string& path, const SimOutput& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << "t,return,true_v,true_jump,true_N,true_gamma\n";
  for (std::size_t t = 0; t < s.returns.size(); ++t) {
    out << (t + 1) << ',' << format_double(s.returns[t]) << ',' << format_double(s.true_volatility[t]) << ','
        << format_double(s.true_jumps[t]) << ',' << s.true_jump_times[t] << ',' << format_double(s.true_gamma[t])
        << '\n';
  }
  if (!out) throw ParseError("failed writing " + path);
}

inline SimOutput read_sim_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows.empty()) throw ParseError(path + ": no data rows");
  const auto c_r = t.require_column("return", path), c_v = t.require_column("true_v", path),
             c_j = t.require_column("true_jump", path), c_n = t.require_column("true_N", path),
             c_g = t.require_column("true_gamma", path);
  std::vector<double> r, v, j, g;
  std::vector<int> times;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    r.push_back(t.number(i, c_r, path));
    v.push_back(t.number(i, c_v, path));
    j.push_back(t.number(i, c_j, path));
    const double nflag = t.number(i, c_n, path);
    if (nflag != 0.0 && nflag != 1.0) throw ParseError(path + ": true_N must be 0 or 1", t.line_numbers[i]);
    times.push_back(static_cast<int>(nflag));
    g.push_back(t.number(i, c_g, path));
  }
  return {ReturnsSeries(std::move(r)), std::move(v), std::move(j), std::move(times), std::move(g)};
}

}  // namespace ngsvj::io
