#pragma once

// Brute-force evaluation of the angular-spectrum integral
//
//   G(r) = integral over R^2 of f(kx, ky, kz) exp(i (kx x + ky y + kz z)) dkx dky
//
// in polar spectral coordinates (k_rho, phi), split at the branch circle
// k_rho = k0:
//   * propagating disk: integrated in kz in (0, k0], k_rho dk_rho = -kz dkz,
//     which removes the 1/kz singularity of Weyl-type spectra;
//   * evanescent exterior: integrated in s = sqrt(k_rho^2 - k0^2), kz = i s,
//     with weight s exp(-s z), truncated once the decay is below tolerance.
// The azimuthal integral is an inner adaptive Gauss-Kronrod integration whose
// initial panels follow the oscillation scale k_rho * rho_xy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "asx/error.hpp"
#include "asx/quadrature.hpp"
#include "asx/spectral.hpp"
#include "asx/spectrum.hpp"

namespace asx {

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double k_max = std::numeric_limits<double>::infinity();  // cap on k_rho; the decay cutoff applies below it
  int max_panels = 4000;   // per one-dimensional adaptive integration
  int phi_nodes = 4;       // minimum number of initial azimuthal panels
  unsigned threads = 0;    // 0: all cores

  void validate(double k0) const {
    if (!(rel_tol >= 1e-12 && rel_tol <= 1e-2))
      throw ConfigError("rel_tol must lie in [1e-12, 1e-2]");
    if (!(k_max > k0)) throw ConfigError("k_max must exceed k0");
    if (max_panels < 16) throw ConfigError("max_panels must be at least 16");
    if (phi_nodes < 1) throw ConfigError("phi_nodes must be positive");
  }
};

enum class OracleStatus { converged, budget_exhausted, diverging };

struct OracleResult {
  cplx value;
  double est_error = 0;
  long evaluations = 0;
  cplx propagating_part;
  cplx evanescent_part;
  OracleStatus status = OracleStatus::converged;

  bool converged() const { return status == OracleStatus::converged; }
};

namespace detail {

/// rel_tol rounded down to a power of ten. Every tolerance within a decade
/// yields the same panels, and tightening across a decade refines them, so
/// asking for more accuracy never returns a coarser answer.
inline double working_tol(double rel_tol) {
  return std::pow(10.0, std::floor(std::log10(rel_tol) + 1e-9));
}

enum class Region { propagating, evanescent };

struct RegionResult {
  cplx value;
  double error = 0;
  long evaluations = 0;
  bool converged = true;
};

class RegionIntegrator {
 public:
  RegionIntegrator(Region region, const SpectrumFunction& f, const ObservationPoint& p, double k0,
                   const QuadratureConfig& cfg)
      : region_(region), f_(f), p_(p), k0_(k0), cfg_(cfg), rho_(p.rho_xy()), phi0_(std::atan2(p.y(), p.x())) {
    if (region_ == Region::propagating) {
      lo_ = 0.0;
      hi_ = k0_;
    } else {
      // smallest s*z with exp(-s z) (1 + s z)^2 <= 1e-13, a tenth of the
      // tightest accepted rel_tol; one cutoff for every tolerance keeps the
      // panels of looser runs nested inside those of tighter ones
      const double target = std::log(1e13);
      double x = target;
      for (int i = 0; i < 50; ++i) x = target + 2.0 * std::log1p(x);
      double s_max = x / p_.z();
      if (std::isfinite(cfg_.k_max)) s_max = std::min(s_max, std::sqrt(cfg_.k_max * cfg_.k_max - k0_ * k0_));
      lo_ = 0.0;
      hi_ = s_max;
    }
  }

  double range() const { return hi_ - lo_; }

  /// Relative-accuracy scouting pass used to fix absolute tolerances.
  RegionResult scout() const { return run(0.0, 1e-5, 0.0, 1e-7); }

  /// inner_abs_tol bounds |weight| times the azimuthal error at every node.
  RegionResult refine(double outer_abs_tol, double inner_abs_tol) const {
    return run(outer_abs_tol, 0.0, inner_abs_tol, 0.0);
  }

 private:
  struct InnerValue {
    cplx value;
    double error = 0;
    long evals = 0;
    bool converged = true;
  };

  // k_rho, kz and the outer weight at the outer variable t.
  void geometry(double t, double& krho, cplx& kz, cplx& weight) const {
    if (region_ == Region::propagating) {
      krho = std::sqrt((k0_ - t) * (k0_ + t));
      kz = {t, 0.0};
      weight = t * std::exp(cplx(0.0, t * p_.z()));
    } else {
      krho = std::sqrt(k0_ * k0_ + t * t);
      kz = {0.0, t};
      weight = t * std::exp(-t * p_.z());
    }
  }

  InnerValue azimuthal(double krho, cplx kz, double abs_tol, double rel_tol) const {
    if (rho_ == 0.0 && f_.radially_symmetric()) {
      return {2.0 * std::numbers::pi * f_.evaluate(krho, 0.0, kz, k0_), 0.0, 1, true};
    }
    // phi measured from the observation azimuth: exp(i k_rho rho cos(phi'))
    auto integrand = [&](double phi) {
      const double ang = phi + phi0_;
      const cplx fv = f_.evaluate(krho * std::cos(ang), krho * std::sin(ang), kz, k0_);
      return fv * std::exp(cplx(0.0, krho * rho_ * std::cos(phi)));
    };
    quad::AdaptiveOptions opt;
    opt.abs_tol = abs_tol;
    opt.rel_tol = rel_tol;
    opt.max_panels = cfg_.max_panels;
    opt.initial_panels = std::max(cfg_.phi_nodes, 2 + static_cast<int>(std::ceil(krho * rho_ / 1.5)));
    const auto r = quad::integrate_adaptive_scalar(integrand, -std::numbers::pi, std::numbers::pi, opt);
    return {r.value, r.error, r.evaluations, r.converged};
  }

  RegionResult run(double outer_abs, double outer_rel, double inner_abs, double inner_rel) const {
    RegionResult out;
    if (!(hi_ > lo_)) return out;

    long inner_evals = 0;
    double inner_err_max = 0.0;
    bool inner_ok = true;

    quad::BatchFn batch = [&](std::span<const double> ts, std::span<cplx> vals) {
      std::vector<InnerValue> slots(ts.size());
      quad::parallel_for(ts.size(), cfg_.threads, [&](std::size_t i) {
        double krho;
        cplx kz, weight;
        geometry(ts[i], krho, kz, weight);
        const double wabs = std::abs(weight);
        InnerValue v = azimuthal(krho, kz, wabs > 0.0 ? inner_abs / wabs : 0.0, inner_rel);
        v.value *= weight;
        v.error *= std::abs(weight);
        slots[i] = v;
      });
      for (std::size_t i = 0; i < ts.size(); ++i) {
        vals[i] = slots[i].value;
        inner_evals += slots[i].evals;
        inner_err_max = std::max(inner_err_max, slots[i].error);
        inner_ok = inner_ok && slots[i].converged;
      }
    };

    quad::AdaptiveOptions opt;
    opt.abs_tol = outer_abs;
    opt.rel_tol = outer_rel;
    opt.max_panels = cfg_.max_panels;
    const double swing = region_ == Region::propagating ? k0_ * (p_.z() + rho_)
                                                         : (std::sqrt(k0_ * k0_ + hi_ * hi_) - k0_) * rho_ + hi_ * p_.z();
    opt.initial_panels = std::min(cfg_.max_panels / 2, 2 + static_cast<int>(std::ceil(swing / 3.0)));
    const auto r = quad::integrate_adaptive(batch, lo_, hi_, opt);

    out.value = r.value;
    // inner errors already carry |weight|; integrate the worst one over the range
    out.error = r.error + inner_err_max * (hi_ - lo_);
    out.evaluations = inner_evals;
    out.converged = r.converged && inner_ok;
    return out;
  }

  Region region_;
  const SpectrumFunction& f_;
  const ObservationPoint& p_;
  double k0_;
  const QuadratureConfig& cfg_;
  double rho_, phi0_;
  double lo_ = 0, hi_ = 0;
};

inline RegionResult refine_region(const RegionIntegrator& ri, double target_abs) {
  return ri.refine(0.4 * target_abs, 0.2 * target_abs / ri.range());
}

inline void check_inputs(double k0, const QuadratureConfig& cfg) {
  if (!(k0 > 0.0) || !std::isfinite(k0)) throw DomainError("k0 must be positive and finite");
  cfg.validate(k0);
}

}  // namespace detail

/// The disk k_rho < k0 of the spectral plane.
inline cplx propagating_integral(const SpectrumFunction& f, const ObservationPoint& p, double k0,
                                 const QuadratureConfig& cfg) {
  detail::check_inputs(k0, cfg);
  detail::RegionIntegrator ri(detail::Region::propagating, f, p, k0, cfg);
  const auto scout = ri.scout();
  if (scout.value == cplx(0.0)) return 0.0;
  return detail::refine_region(ri, detail::working_tol(cfg.rel_tol) * std::abs(scout.value)).value;
}

/// The exterior k_rho > k0, where Im(kz) > 0 makes every component decay in z.
inline cplx evanescent_integral(const SpectrumFunction& f, const ObservationPoint& p, double k0,
                                const QuadratureConfig& cfg) {
  detail::check_inputs(k0, cfg);
  detail::RegionIntegrator ri(detail::Region::evanescent, f, p, k0, cfg);
  const auto scout = ri.scout();
  if (scout.value == cplx(0.0)) return 0.0;
  return detail::refine_region(ri, detail::working_tol(cfg.rel_tol) * std::abs(scout.value)).value;
}

inline OracleResult oracle_eval(const SpectrumFunction& f, const ObservationPoint& p, double k0,
                                const QuadratureConfig& cfg) {
  detail::check_inputs(k0, cfg);
  detail::RegionIntegrator prop(detail::Region::propagating, f, p, k0, cfg);
  detail::RegionIntegrator evan(detail::Region::evanescent, f, p, k0, cfg);

  OracleResult res;
  const auto sp = prop.scout();
  const auto se = evan.scout();
  const double scale = std::abs(sp.value + se.value);
  res.evaluations = sp.evaluations + se.evaluations;
  if (scale == 0.0) {
    if (sp.error + se.error > 0.0) res.status = OracleStatus::diverging;
    res.est_error = sp.error + se.error;
    return res;
  }
  if (!std::isfinite(scale)) throw ConvergenceError("oracle produced a non-finite value");

  const double target = detail::working_tol(cfg.rel_tol) * scale;
  const auto rp = detail::refine_region(prop, target);
  const auto re = detail::refine_region(evan, target);
  res.propagating_part = rp.value;
  res.evanescent_part = re.value;
  res.value = rp.value + re.value;
  res.est_error = rp.error + re.error;
  res.evaluations += rp.evaluations + re.evaluations;

  if (!std::isfinite(res.value.real()) || !std::isfinite(res.value.imag()))
    throw ConvergenceError("oracle produced a non-finite value");
  if (res.est_error > std::abs(res.value)) {
    res.status = OracleStatus::diverging;
  } else if (!rp.converged || !re.converged || res.est_error > cfg.rel_tol * std::abs(res.value)) {
    res.status = OracleStatus::budget_exhausted;
  }
  return res;
}

}  // namespace asx
