#pragma once

// Sweeps comparing the leading-order value against the quadrature oracle,
// log-log slope fitting, and CSV / JSON-lines emission of the records.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "asx/asymptotics.hpp"
#include "asx/error.hpp"
#include "asx/oracle.hpp"
#include "asx/quadrature.hpp"
#include "asx/spectral.hpp"
#include "asx/spectrum.hpp"

namespace asx {

/// Largest k0 r the oracle is asked to handle; cost grows quadratically past it.
inline constexpr double kOracleEnvelope = 300.0;

struct ComparisonRecord {
  double k0r = 0;
  double theta = 0;
  ObservationPoint point;
  cplx asym;
  cplx oracle;
  double rel_error = 0;  // |asym - oracle| / |oracle|
  double validity_margin = 0;
  double wall_time_oracle = 0;  // seconds, not serialized
  bool ok = true;               // false when the oracle failed or did not converge
  std::string note;
};

struct SweepConfig {
  SpectrumFunction spectrum = SpectrumFunction::constant();
  double k0 = 1.0;
  std::vector<double> theta_values;
  std::vector<double> k0r_values;
  double azimuth = 0.0;
  QuadratureConfig oracle_cfg;
  unsigned threads = 0;  // records evaluated concurrently; each oracle runs single-threaded

  void validate() const {
    if (!(k0 > 0.0) || !std::isfinite(k0)) throw ConfigError("k0 must be positive");
    if (theta_values.empty() || k0r_values.empty()) throw ConfigError("sweep grid is empty");
    for (double t : theta_values)
      if (!(t > 0.0 && t <= 1.0)) throw ConfigError("theta values must lie in (0, 1]");
    for (double k : k0r_values) {
      if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("k0r values must be positive");
      if (k > kOracleEnvelope) throw ConfigError("k0r values must not exceed 300 when the oracle is enabled");
    }
    if (!std::isfinite(azimuth)) throw ConfigError("azimuth must be finite");
    oracle_cfg.validate(k0);
  }
};

/// Observation point at distance r = k0r/k0 with z/r = theta, placed at the given azimuth.
inline ObservationPoint point_from(double theta, double k0r, double k0, double azimuth) {
  const double r = k0r / k0;
  const double rho = r * std::sqrt(std::max(0.0, (1.0 - theta) * (1.0 + theta)));
  return ObservationPoint::make(rho * std::cos(azimuth), rho * std::sin(azimuth), theta * r);
}

namespace detail {

inline ComparisonRecord compare_one(const SweepConfig& cfg, double theta, double k0r) {
  const auto p = point_from(theta, k0r, cfg.k0, cfg.azimuth);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ComparisonRecord rec{k0r, theta, p, {nan, nan}, {nan, nan}, nan, nan, 0.0, true, {}};
  try {
    const auto lo = leading_order(cfg.spectrum, p, cfg.k0);
    rec.asym = lo.value;
    rec.validity_margin = lo.validity_margin;
    QuadratureConfig qc = cfg.oracle_cfg;
    qc.threads = 1;
    const auto t0 = std::chrono::steady_clock::now();
    const auto o = oracle_eval(cfg.spectrum, p, cfg.k0, qc);
    rec.wall_time_oracle = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.oracle = o.value;
    rec.rel_error = std::abs(rec.asym - rec.oracle) / std::abs(rec.oracle);
    if (!o.converged()) {
      rec.ok = false;
      rec.note = o.status == OracleStatus::diverging ? "oracle diverging" : "oracle budget exhausted";
    }
  } catch (const Error& e) {
    rec.ok = false;
    rec.note = e.what();
  }
  return rec;
}

inline std::vector<ComparisonRecord> evaluate_grid(const SweepConfig& cfg,
                                                   const std::vector<std::pair<double, double>>& grid) {
  std::vector<std::optional<ComparisonRecord>> slots(grid.size());
  quad::parallel_for(grid.size(), cfg.threads,
                     [&](std::size_t i) { slots[i] = compare_one(cfg, grid[i].first, grid[i].second); });
  std::vector<ComparisonRecord> out;
  out.reserve(grid.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace detail

/// One record per (theta, k0r) pair, theta-major in the order given.
inline std::vector<ComparisonRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<double, double>> grid;
  for (double t : cfg.theta_values)
    for (double k : cfg.k0r_values) grid.emplace_back(t, k);
  return detail::evaluate_grid(cfg, grid);
}

/// Records across the theta grid for each k0r (k0r-major, theta as given),
/// charting the error against theta / theta0.
inline std::vector<ComparisonRecord> validity_map(const SweepConfig& cfg) {
  cfg.validate();
  if (cfg.theta_values.size() < 2) throw ConfigError("validity map needs at least two theta values");
  std::vector<std::pair<double, double>> grid;
  for (double k : cfg.k0r_values)
    for (double t : cfg.theta_values) grid.emplace_back(t, k);
  return detail::evaluate_grid(cfg, grid);
}

/// Least-squares slope of log(rel_error) against log(k0r) at one theta.
inline double fit_convergence_slope(const std::vector<ComparisonRecord>& records, double theta_fixed) {
  std::vector<double> lx, ly;
  for (const auto& r : records) {
    if (std::abs(r.theta - theta_fixed) > 1e-12 * std::max(1.0, std::abs(theta_fixed))) continue;
    if (!std::isfinite(r.rel_error)) continue;
    if (!(r.rel_error > 0.0)) throw ConfigError("slope fit needs strictly positive errors");
    lx.push_back(std::log(r.k0r));
    ly.push_back(std::log(r.rel_error));
  }
  if (lx.size() < 4) throw ConfigError("slope fit needs at least 4 records at the requested theta");
  std::vector<double> distinct = lx;
  std::sort(distinct.begin(), distinct.end());
  if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 4)
    throw ConfigError("slope fit needs at least 4 distinct k0r values");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("slope fit needs distinct k0r values");
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Serialization

enum class Format { csv, obj };

inline constexpr std::string_view kCsvHeader =
    "k0r,theta,x,y,z,asym_re,asym_im,oracle_re,oracle_im,rel_error,validity_margin";

/// 17 significant digits; non-finite values as "nan" / "inf" / "-inf".
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, end);
}

inline std::optional<double> parse_real(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

namespace detail {

inline std::vector<std::pair<std::string_view, double>> record_fields(const ComparisonRecord& r) {
  return {{"k0r", r.k0r},
          {"theta", r.theta},
          {"x", r.point.x()},
          {"y", r.point.y()},
          {"z", r.point.z()},
          {"asym_re", r.asym.real()},
          {"asym_im", r.asym.imag()},
          {"oracle_re", r.oracle.real()},
          {"oracle_im", r.oracle.imag()},
          {"rel_error", r.rel_error},
          {"validity_margin", r.validity_margin}};
}

}  // namespace detail

/// JSON value for a real: 17 digits, null when not finite.
inline std::string json_real(double v) { return std::isfinite(v) ? format_real(v) : "null"; }

inline void emit(const std::vector<ComparisonRecord>& records, Format format, std::ostream& out) {
  if (format == Format::csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
      bool first = true;
      for (const auto& [name, v] : detail::record_fields(r)) {
        if (!first) out << ',';
        out << format_real(v);
        first = false;
      }
      out << '\n';
    }
  } else {
    for (const auto& r : records) {
      out << '{';
      bool first = true;
      for (const auto& [name, v] : detail::record_fields(r)) {
        if (!first) out << ',';
        out << '"' << name << "\":" << json_real(v);
        first = false;
      }
      out << "}\n";
    }
  }
  if (!out) throw Error("failed to write records");
}

/// Reads records written by emit(..., Format::csv). Lines starting with '#' are skipped.
inline std::vector<ComparisonRecord> parse_csv(std::istream& in) {
  std::vector<ComparisonRecord> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ConfigError("unexpected CSV header");
      header_seen = true;
      continue;
    }
    double v[11];
    std::size_t n = 0, start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      const auto field = std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (n >= 11) throw ConfigError("too many CSV fields");
      const auto parsed = parse_real(field);
      if (!parsed) throw ConfigError("malformed CSV number '" + std::string(field) + "'");
      v[n++] = *parsed;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (n != 11) throw ConfigError("expected 11 CSV fields");
    out.push_back(ComparisonRecord{v[0], v[1], ObservationPoint::make(v[2], v[3], v[4]), {v[5], v[6]},
                                   {v[7], v[8]}, v[9], v[10], 0.0, true, {}});
  }
  if (!header_seen) throw ConfigError("missing CSV header");
  return out;
}

}  // namespace asx
