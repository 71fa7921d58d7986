#pragma once

// Leading-order far-zone evaluation of the angular-spectrum integral.
//
// On the local SDP the phase is stationary at the saddle and, to second
// order, U ~ i (a xi^2 + b eta^2 + 2 c xi eta) with a = 1 - y^2/r^2,
// b = 1 - x^2/r^2, c = x y / r^2 and ab - c^2 = theta^2. Freezing f at the
// saddle and extending the Gaussian to the whole (xi, eta) plane gives
//
//   G(r) ~ f(saddle) exp(i k0 r) J pi / (k0 r theta),   J = kzs^2 (1 - i)^2,
//
// where J is the measure factor dkx dky = J dxi deta of the linear SDP map.
// The approximation is meaningful only for theta > theta0 = (k0 r)^(-1/2);
// below that it is still computed, and flagged.

#include <cmath>
#include <complex>
#include <numbers>

#include "asx/error.hpp"
#include "asx/quadrature.hpp"
#include "asx/spectral.hpp"
#include "asx/spectrum.hpp"

namespace asx {

struct QuadraticForm {
  double a = 0, b = 0, c = 0;
  double det = 0;  // a*b - c*c, equal to theta^2
  double theta = 0;

  bool positive_definite() const { return a > 0.0 && det > 0.0; }
};

struct AsymptoticResult {
  cplx value;
  double k0r = 0;
  double theta = 0;
  double theta0 = 0;
  double validity_margin = 0;  // theta / theta0
  bool is_valid = false;       // theta > theta0
  SaddleData saddle;
  cplx spectrum_at_saddle;
};

inline QuadraticForm quadratic_coeffs(const ObservationPoint& p) {
  QuadraticForm q;
  const double ux = p.ux(), uy = p.uy();
  q.a = 1.0 - uy * uy;
  q.b = 1.0 - ux * ux;
  q.c = ux * uy;
  q.det = q.a * q.b - q.c * q.c;
  q.theta = p.theta();
  return q;
}

/// Second-order Taylor polynomial of U at the saddle.
inline cplx truncated_phase(const QuadraticForm& q, double xi, double eta) {
  return {0.0, q.a * xi * xi + q.b * eta * eta + 2.0 * q.c * xi * eta};
}

/// Integral over the whole plane of exp(-k0r (a xi^2 + b eta^2 + 2 c xi eta)).
inline cplx gaussian_closed_form(const QuadraticForm& q, double k0r) {
  if (!(k0r > 0.0)) throw DomainError("gaussian_closed_form needs k0r > 0");
  if (!q.positive_definite()) throw DomainError("quadratic form is not positive definite (grazing observation)");
  return std::numbers::pi / (k0r * std::sqrt(q.det));
}

/// dkx dky = sdp_jacobian(s) dxi deta on the linear SDP map.
inline cplx sdp_jacobian(const SaddleData& s) {
  const cplx d = s.kzs * cplx(1.0, -1.0);
  return d * d;
}

inline AsymptoticResult leading_order(const SpectrumFunction& f, const ObservationPoint& p, double k0) {
  AsymptoticResult res;
  res.saddle = saddle_point(p, k0);
  const auto& s = res.saddle;
  res.k0r = s.k0r;
  res.theta = p.theta();
  res.theta0 = s.theta0;
  res.validity_margin = res.theta / res.theta0;
  res.is_valid = res.validity_margin > 1.0;
  res.spectrum_at_saddle = f.evaluate(s.kxs, s.kys, s.kzs, k0);
  const auto q = quadratic_coeffs(p);
  res.value = res.spectrum_at_saddle * std::exp(cplx(0.0, s.k0r)) * sdp_jacobian(s) * gaussian_closed_form(q, s.k0r);
  return res;
}

namespace detail {

inline cplx local_sdp_sum(const SpectrumFunction& f, const ObservationPoint& p, const SaddleData& s,
                          double half_width, int n) {
  const auto rule = quad::gauss_legendre(n);
  cplx total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = half_width * rule.nodes[i];
    cplx row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double eta = half_width * rule.nodes[j];
      const auto o = detail::sdp_offsets(s, xi, eta);
      const cplx u = (o.dkx * p.ux() + o.dky * p.uy() + o.dkz * p.uz()) / s.k0;
      const cplx fv = f.evaluate(s.kxs + o.dkx, s.kys + o.dky, o.kz, s.k0);
      row += rule.weights[j] * fv * std::exp(cplx(0.0, s.k0r) * u);
    }
    total += rule.weights[i] * row;
  }
  return total * half_width * half_width * sdp_jacobian(s) * std::exp(cplx(0.0, s.k0r));
}

}  // namespace detail

/// Tensor Gauss-Legendre integration of f exp(i k0 r U) over the square
/// [-half_width, half_width]^2 of the local SDP, with the exact phase.
///
/// The n-node value is returned; it must agree with the 2n-node value to
/// 1e-6 relative or ConvergenceError is thrown.
inline cplx local_sdp_integral(const SpectrumFunction& f, const ObservationPoint& p, double k0, double half_width,
                               int n) {
  if (n < 16) throw ConfigError("local_sdp_integral needs n >= 16");
  if (!(half_width > 0.0)) throw ConfigError("local_sdp_integral needs half_width > 0");
  const auto s = saddle_point(p, k0);
  const cplx coarse = detail::local_sdp_sum(f, p, s, half_width, n);
  const cplx fine = detail::local_sdp_sum(f, p, s, half_width, 2 * n);
  const double scale = std::max(std::abs(coarse), std::abs(fine));
  if (std::abs(fine - coarse) > 1e-6 * scale)
    throw ConvergenceError("local SDP quadrature changed by " + std::to_string(std::abs(fine - coarse) / scale) +
                           " (relative) when the node count doubled");
  return coarse;
}

}  // namespace asx
