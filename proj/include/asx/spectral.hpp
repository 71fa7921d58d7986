#pragma once

// Spectral geometry of the angular-spectrum integral: the k_z branch on the
// top Riemann sheet, the saddle point seen from an observation point, the
// linear local steepest-descent parametrization around it, and the exact
// phase U(xi, eta) on that parametrization.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "asx/error.hpp"

namespace asx {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Far-zone observation location in the upper half space z > 0.
///
/// Construction validates the half-space condition once; every downstream
/// formula divides by r or by theta = z/r.
class ObservationPoint {
 public:
  static ObservationPoint make(double x, double y, double z) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw DomainError("observation point has non-finite coordinates");
    if (!(z > 0.0))
      throw DomainError("observation point must satisfy z > 0 (got z = " + std::to_string(z) + ")");
    return ObservationPoint(x, y, z);
  }

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  double r() const { return r_; }
  double theta() const { return z_ / r_; }
  double rho_xy() const { return std::hypot(x_, y_); }
  double rho_x() const { return std::hypot(y_, z_); }  // sqrt(r^2 - x^2)
  double rho_y() const { return std::hypot(x_, z_); }  // sqrt(r^2 - y^2)

  // direction cosines
  double ux() const { return x_ / r_; }
  double uy() const { return y_ / r_; }
  double uz() const { return z_ / r_; }

 private:
  ObservationPoint(double x, double y, double z)
      : x_(x), y_(y), z_(z), r_(std::sqrt(x * x + y * y + z * z)) {}

  double x_, y_, z_, r_;
};

/// Saddle of the spectral phase for a given observation direction.
struct SaddleData {
  double kxs = 0, kys = 0, kzs = 0;
  double psi_x = 0, psi_y = 0;  // reporting only
  double k0 = 0;
  double k0r = 0;
  double theta0 = 0;
};

struct ComplexWaveVector {
  cplx kx, ky, kz;
};

/// Top-sheet k_z = sqrt(k0^2 - kx^2 - ky^2).
///
/// For real (kx, ky) the sheet with Im(kz) >= 0 is selected explicitly, so a
/// negative zero in the imaginary parts cannot flip the sign. For complex
/// arguments the principal root is returned; on the local SDP this is the
/// analytic continuation from the saddle (see certify_branch_path).
inline cplx kz_branch(cplx kx, cplx ky, double k0) {
  if (kx.imag() == 0.0 && ky.imag() == 0.0) {
    const double q = k0 * k0 - kx.real() * kx.real() - ky.real() * ky.real();
    if (q >= 0.0) return {std::sqrt(q), 0.0};
    return {0.0, std::sqrt(-q)};
  }
  return std::sqrt(k0 * k0 - kx * kx - ky * ky);
}

inline double validity_threshold(double k0, double r) {
  if (!(k0 > 0.0) || !(r > 0.0)) throw DomainError("validity_threshold needs k0 > 0 and r > 0");
  return 1.0 / std::sqrt(k0 * r);
}

inline SaddleData saddle_point(const ObservationPoint& p, double k0) {
  if (!(k0 > 0.0) || !std::isfinite(k0)) throw DomainError("k0 must be positive and finite");
  SaddleData s;
  s.k0 = k0;
  s.kxs = k0 * p.ux();
  s.kys = k0 * p.uy();
  s.kzs = k0 * p.uz();
  s.psi_x = std::acos(std::clamp(p.ux(), -1.0, 1.0));
  s.psi_y = std::acos(std::clamp(p.uy(), -1.0, 1.0));
  s.k0r = k0 * p.r();
  s.theta0 = validity_threshold(k0, p.r());
  return s;
}

/// Throws BranchError if q(t) = a + b t + c t^2 meets the closed negative real
/// axis for some t in (0, 1]. q(0) = a is assumed to lie off that axis.
inline void certify_branch_path(cplx a, cplx b, cplx c) {
  auto re_at = [&](double t) { return (a + t * (b + t * c)).real(); };
  auto fail = [](double t) {
    throw BranchError("k_z^2 crosses the branch cut along the local SDP (t = " + std::to_string(t) + ")");
  };
  const double ai = a.imag(), bi = b.imag(), ci = c.imag();
  const double eps = 1e-300;

  if (std::abs(ci) < eps && std::abs(bi) < eps) {
    if (std::abs(ai) > eps) return;  // Im(q) is a nonzero constant
    // q(t) real along the whole ray: check its minimum on [0, 1]
    double tmin = 1.0;
    double lo = std::min(re_at(0.0), re_at(1.0));
    if (c.real() > 0.0) {
      const double tv = -b.real() / (2.0 * c.real());
      if (tv > 0.0 && tv < 1.0) {
        lo = std::min(lo, re_at(tv));
        tmin = tv;
      }
    }
    if (lo <= 0.0) fail(tmin);
    return;
  }

  double roots[2];
  int nroots = 0;
  if (std::abs(ci) < eps) {
    roots[nroots++] = -ai / bi;
  } else {
    const double disc = bi * bi - 4.0 * ci * ai;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    // numerically stable pair
    const double qq = -0.5 * (bi + std::copysign(sq, bi));
    roots[nroots++] = qq / ci;
    if (qq != 0.0) roots[nroots++] = ai / qq;
  }
  for (int k = 0; k < nroots; ++k) {
    const double t = roots[k];
    if (t > 0.0 && t <= 1.0 && re_at(t) <= 0.0) fail(t);
  }
}

namespace detail {

/// Offsets from the saddle along the local SDP, with dkz computed without
/// cancellation: dkz = (kz^2 - kzs^2) / (kz + kzs).
struct SdpOffsets {
  cplx dkx, dky, dkz, kz;
};

inline SdpOffsets sdp_offsets(const SaddleData& s, double xi, double eta) {
  const cplx dir = s.kzs * cplx(1.0, -1.0);
  const cplx dkx = dir * xi;
  const cplx dky = dir * eta;
  // kz^2(t) = kzs^2 + t*lin + t^2*quad along the ray from the saddle
  const cplx lin = -2.0 * (s.kxs * dkx + s.kys * dky);
  const cplx quad = -(dkx * dkx + dky * dky);
  certify_branch_path(cplx(s.kzs * s.kzs, 0.0), lin, quad);
  const cplx delta = lin + quad;
  const cplx kz = std::sqrt(s.kzs * s.kzs + delta);
  const cplx dkz = (xi == 0.0 && eta == 0.0) ? cplx(0.0) : delta / (kz + s.kzs);
  return {dkx, dky, dkz, kz};
}

}  // namespace detail

/// Point of the local SDP: kx = kxs + kzs(1-i) xi, ky = kys + kzs(1-i) eta.
inline ComplexWaveVector sdp_map(const SaddleData& s, double xi, double eta) {
  const auto o = detail::sdp_offsets(s, xi, eta);
  return {s.kxs + o.dkx, s.kys + o.dky, o.kz};
}

/// Exact phase U = (kx x + ky y + kz z)/(k0 r) - 1 on the local SDP.
///
/// Evaluated from the offsets to the saddle, so U(0, 0) is exactly zero.
inline cplx phase_U(const SaddleData& s, const ObservationPoint& p, double xi, double eta) {
  const auto o = detail::sdp_offsets(s, xi, eta);
  return (o.dkx * p.ux() + o.dky * p.uy() + o.dkz * p.uz()) / s.k0;
}

/// The half-width of the local SDP domain, 6/sqrt(k0 r), in (xi, eta).
inline double default_half_width(double k0r) { return 6.0 / std::sqrt(k0r); }

}  // namespace asx
