#pragma once

// Command-line front end: eval, oracle, compare, validity-map, parse-check.
//
// Exit codes: 0 success, 2 usage or configuration, 3 domain, 4 numerical
// non-convergence. Data goes to --out (default stdout); diagnostics go to the
// error stream only.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "asx/asymptotics.hpp"
#include "asx/error.hpp"
#include "asx/oracle.hpp"
#include "asx/spectral.hpp"
#include "asx/spectrum.hpp"
#include "asx/study.hpp"

namespace asx::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDomain = 3, kNonConvergence = 4 };

/// Parsed a:b:n[:log] sweep axis.
struct Grid {
  double first = 0, last = 0;
  int count = 0;
  bool log = false;

  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) {
      if (i == 0) {
        v.push_back(first);
      } else if (i + 1 == count) {
        v.push_back(last);
      } else {
        const double t = static_cast<double>(i) / (count - 1);
        v.push_back(log ? std::exp(std::log(first) + t * (std::log(last) - std::log(first)))
                        : first + t * (last - first));
      }
    }
    return v;
  }
};

inline Grid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3 && parts.size() != 4) throw ConfigError("grid must look like a:b:n or a:b:n:log");
  Grid g;
  const auto a = parse_real(parts[0]), b = parse_real(parts[1]);
  int n = 0;
  auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), n);
  if (!a || !b || !std::isfinite(*a) || !std::isfinite(*b) || ec != std::errc() ||
      ptr != parts[2].data() + parts[2].size() || n < 1)
    throw ConfigError("malformed grid '" + text + "'");
  if (parts.size() == 4) {
    if (parts[3] != "log") throw ConfigError("grid spacing must be 'log' when given");
    g.log = true;
    if (!(*a > 0.0) || !(*b > 0.0)) throw ConfigError("log grid needs positive bounds");
  }
  g.first = *a;
  g.last = *b;
  g.count = n;
  return g;
}

inline std::vector<double> parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = parse_real(item);
    if (!x || !std::isfinite(*x)) throw ConfigError("malformed point coordinate '" + item + "'");
    v.push_back(*x);
  }
  if (v.size() != 3) throw ConfigError("--point needs three comma-separated reals x,y,z");
  return v;
}

/// ASX_THREADS, or 0 (all cores) when unset.
inline unsigned threads_from_env() {
  const char* env = std::getenv("ASX_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  int n = 0;
  const std::string_view s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n < 1)
    throw ConfigError("ASX_THREADS must be a positive integer");
  return static_cast<unsigned>(n);
}

namespace detail {

struct Shared {
  double k0 = 1.0;
  std::string spectrum;
  std::string spectrum_expr;
  std::string out = "-";
  std::string format = "csv";
};

inline void add_shared(CLI::App* sub, Shared& s, bool with_spectrum = true) {
  if (with_spectrum) {
    sub->add_option("--k0", s.k0, "free-space wavenumber")->capture_default_str();
    auto* builtin = sub->add_option("--spectrum", s.spectrum, "builtin spectrum: weyl, constant, gaussian[(w)]");
    auto* expr = sub->add_option("--spectrum-expr", s.spectrum_expr, "spectrum expression in kx, ky, kz, k0");
    builtin->excludes(expr);
  }
  sub->add_option("--out", s.out, "output path, '-' for stdout")->capture_default_str();
  sub->add_option("--format", s.format, "csv or obj")
      ->check(CLI::IsMember({"csv", "obj"}))
      ->capture_default_str();
}

inline SpectrumFunction resolve_spectrum(const Shared& s) {
  if (!s.spectrum_expr.empty()) return parse_spectrum(s.spectrum_expr);
  if (!s.spectrum.empty()) return SpectrumFunction::builtin(s.spectrum);
  throw ConfigError("one of --spectrum or --spectrum-expr is required");
}

inline Format resolve_format(const Shared& s) { return s.format == "obj" ? Format::obj : Format::csv; }

inline void check_k0(double k0) {
  if (!(k0 > 0.0) || !std::isfinite(k0)) throw ConfigError("--k0 must be positive");
}

/// Writes a flat record either as a CSV header + row or as one JSON object.
class Table {
 public:
  void add(std::string name, std::string value, bool quoted = false) {
    cols_.push_back({std::move(name), std::move(value), quoted});
  }
  void add_real(std::string name, double v) { cols_.push_back({std::move(name), format_real(v), false, true}); }

  void write(std::ostream& out, Format f) const {
    if (f == Format::csv) {
      for (std::size_t i = 0; i < cols_.size(); ++i) out << (i ? "," : "") << cols_[i].name;
      out << '\n';
      for (std::size_t i = 0; i < cols_.size(); ++i) out << (i ? "," : "") << csv_escape(cols_[i].value);
      out << '\n';
    } else {
      out << '{';
      for (std::size_t i = 0; i < cols_.size(); ++i) {
        const auto& c = cols_[i];
        out << (i ? "," : "") << '"' << c.name << "\":";
        if (c.quoted) {
          out << json_string(c.value);
        } else if (c.real && (c.value == "nan" || c.value == "inf" || c.value == "-inf")) {
          out << "null";
        } else {
          out << c.value;
        }
      }
      out << "}\n";
    }
  }

  static std::string csv_escape(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string o = "\"";
    for (char c : v) o += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return o + "\"";
  }

  static std::string json_string(const std::string& v) {
    std::string o = "\"";
    for (char c : v) {
      if (c == '"' || c == '\\') {
        o += '\\';
        o += c;
      } else if (static_cast<unsigned char>(c) < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\u%04x", c);
        o += buf;
      } else {
        o += c;
      }
    }
    return o + "\"";
  }

 private:
  struct Col {
    std::string name, value;
    bool quoted = false;
    bool real = false;
  };
  std::vector<Col> cols_;
};

inline void deliver(const std::string& data, const std::string& dest, std::ostream& out) {
  if (dest == "-" || dest.empty()) {
    out << data;
    out.flush();
    return;
  }
  std::ofstream f(dest, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + dest + "'");
  f << data;
  if (!f) throw ConfigError("failed writing output file '" + dest + "'");
}

}  // namespace detail

/// Runs the CLI. Streams are injectable for in-process testing.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Far-zone asymptotics of angular-spectrum double integrals", "asx"};
  app.require_subcommand(1);

  detail::Shared shared;
  std::string point;
  double tol = 1e-8;
  double kmax = std::numeric_limits<double>::infinity();
  int max_panels = 4000;
  double theta = 0.8;
  double azimuth = 0.0;
  std::string grid_text;
  double k0r = 100.0;

  auto* eval = app.add_subcommand("eval", "leading-order asymptotic value at one point");
  detail::add_shared(eval, shared);
  eval->add_option("--point", point, "observation point x,y,z")->required();

  auto* oracle = app.add_subcommand("oracle", "brute-force quadrature of the spectral integral at one point");
  detail::add_shared(oracle, shared);
  oracle->add_option("--point", point, "observation point x,y,z")->required();
  oracle->add_option("--tol", tol, "relative tolerance in [1e-12, 1e-2]")->capture_default_str();
  oracle->add_option("--kmax", kmax, "truncation radius in k_rho (default: decay cutoff)");
  oracle->add_option("--max-panels", max_panels, "panel budget per 1-D integration")->capture_default_str();

  auto* compare = app.add_subcommand("compare", "asymptotic vs oracle sweep over k0r at fixed theta, with slope fit");
  detail::add_shared(compare, shared);
  compare->add_option("--theta", theta, "z/r of the observation direction")->capture_default_str();
  compare->add_option("--k0r-grid", grid_text, "a:b:n[:log]")->required();
  compare->add_option("--azimuth", azimuth, "placement angle in the x-y plane (radians)")->capture_default_str();
  compare->add_option("--tol", tol, "oracle relative tolerance")->capture_default_str();

  auto* vmap = app.add_subcommand("validity-map", "asymptotic vs oracle across theta at fixed k0r");
  detail::add_shared(vmap, shared);
  vmap->add_option("--k0r", k0r, "k0 r of every point")->capture_default_str();
  vmap->add_option("--theta-grid", grid_text, "a:b:n[:log]")->required();
  vmap->add_option("--azimuth", azimuth, "placement angle in the x-y plane (radians)")->capture_default_str();
  vmap->add_option("--tol", tol, "oracle relative tolerance")->capture_default_str();

  auto* pcheck = app.add_subcommand("parse-check", "validate a spectrum expression");
  detail::add_shared(pcheck, shared, false);
  pcheck->add_option("--spectrum-expr", shared.spectrum_expr, "spectrum expression")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const Format format = detail::resolve_format(shared);
  std::ostringstream data;

  try {
    if (pcheck->parsed()) {
      detail::Table t;
      try {
        const auto f = parse_spectrum(shared.spectrum_expr);
        t.add("status", "ok", true);
        t.add("kind", "", true);
        t.add("column", "0");
        t.add("message", "", true);
        t.add("normalized", f.describe(), true);
        t.write(data, format);
        detail::deliver(data.str(), shared.out, out);
        return kOk;
      } catch (const ParseError& e) {
        t.add("status", "error", true);
        t.add("kind", std::string(ParseError::kind_name(e.kind)), true);
        t.add("column", std::to_string(e.column));
        std::string msg = e.detail;
        if (!e.expected.empty()) {
          msg += "; expected one of:";
          for (const auto& x : e.expected) msg += " " + x;
        }
        t.add("message", msg, true);
        t.add("normalized", "", true);
        t.write(data, format);
        detail::deliver(data.str(), shared.out, out);
        err << "asx: " << e.what() << '\n';
        return kUsage;
      }
    }

    detail::check_k0(shared.k0);
    const unsigned threads = threads_from_env();
    // the observation point is checked before the spectrum so a half-space
    // violation is reported as such even when no spectrum was given
    std::optional<ObservationPoint> at;
    if (eval->parsed() || oracle->parsed()) {
      const auto xyz = parse_point(point);
      at = ObservationPoint::make(xyz[0], xyz[1], xyz[2]);
    }
    const SpectrumFunction spectrum = detail::resolve_spectrum(shared);

    if (eval->parsed()) {
      const auto& p = *at;
      const auto r = leading_order(spectrum, p, shared.k0);
      detail::Table t;
      t.add_real("value_re", r.value.real());
      t.add_real("value_im", r.value.imag());
      t.add_real("k0r", r.k0r);
      t.add_real("theta", r.theta);
      t.add_real("theta0", r.theta0);
      t.add_real("validity_margin", r.validity_margin);
      t.add("is_valid", r.is_valid ? "true" : "false");
      t.add_real("spectrum_re", r.spectrum_at_saddle.real());
      t.add_real("spectrum_im", r.spectrum_at_saddle.imag());
      t.write(data, format);
      detail::deliver(data.str(), shared.out, out);
      return kOk;
    }

    QuadratureConfig qc;
    qc.rel_tol = tol;
    qc.threads = threads;

    if (oracle->parsed()) {
      qc.k_max = kmax;
      qc.max_panels = max_panels;
      qc.validate(shared.k0);
      const auto& p = *at;
      const auto r = oracle_eval(spectrum, p, shared.k0, qc);
      detail::Table t;
      t.add_real("value_re", r.value.real());
      t.add_real("value_im", r.value.imag());
      t.add_real("est_error", r.est_error);
      t.add("evaluations", std::to_string(r.evaluations));
      t.add_real("propagating_re", r.propagating_part.real());
      t.add_real("propagating_im", r.propagating_part.imag());
      t.add_real("evanescent_re", r.evanescent_part.real());
      t.add_real("evanescent_im", r.evanescent_part.imag());
      t.add("status", r.status == OracleStatus::converged      ? "converged"
                      : r.status == OracleStatus::diverging    ? "diverging"
                                                               : "budget-exhausted",
            true);
      t.write(data, format);
      detail::deliver(data.str(), shared.out, out);
      if (!r.converged()) {
        err << "asx: oracle did not reach the requested tolerance\n";
        return kNonConvergence;
      }
      return kOk;
    }

    SweepConfig sc;
    sc.spectrum = spectrum;
    sc.k0 = shared.k0;
    sc.azimuth = azimuth;
    sc.oracle_cfg = qc;
    sc.threads = threads;

    if (compare->parsed()) {
      const auto grid = parse_grid(grid_text);
      if (grid.count < 4) throw ConfigError("compare needs at least 4 grid points for the slope fit");
      sc.theta_values = {theta};
      sc.k0r_values = grid.values();
      const auto records = run_sweep(sc);
      emit(records, format, data);
      bool all_ok = true;
      bool exact = true;
      for (const auto& r : records) {
        all_ok = all_ok && r.ok;
        exact = exact && std::isfinite(r.rel_error) && r.rel_error < 1e-10;
      }
      std::string slope;
      if (exact) {
        slope = "exact";
      } else {
        try {
          slope = format_real(fit_convergence_slope(records, theta));
        } catch (const ConfigError& e) {
          slope = "undetermined";
          err << "asx: " << e.what() << '\n';
        }
      }
      if (format == Format::csv) {
        data << "# slope," << slope << '\n';
      } else {
        data << "{\"slope\":" << (slope == "exact" || slope == "undetermined" ? "\"" + slope + "\"" : slope) << "}\n";
      }
      detail::deliver(data.str(), shared.out, out);
      for (const auto& r : records)
        if (!r.ok) err << "asx: record k0r=" << format_real(r.k0r) << ": " << r.note << '\n';
      return all_ok ? kOk : kNonConvergence;
    }

    if (vmap->parsed()) {
      const auto grid = parse_grid(grid_text);
      sc.theta_values = grid.values();
      sc.k0r_values = {k0r};
      const auto records = validity_map(sc);
      emit(records, format, data);
      detail::deliver(data.str(), shared.out, out);
      bool all_ok = true;
      for (const auto& r : records) {
        all_ok = all_ok && r.ok;
        if (!r.ok) err << "asx: record theta=" << format_real(r.theta) << ": " << r.note << '\n';
      }
      return all_ok ? kOk : kNonConvergence;
    }
  } catch (const ParseError& e) {
    err << "asx: --spectrum-expr: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "asx: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "asx: " << e.what() << '\n';
    return kDomain;
  } catch (const EvalError& e) {
    err << "asx: " << e.what() << '\n';
    return kDomain;
  } catch (const Error& e) {
    err << "asx: " << e.what() << '\n';
    return kNonConvergence;
  }
  return kUsage;
}

}  // namespace asx::cli
