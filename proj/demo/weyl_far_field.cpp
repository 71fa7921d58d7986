// Leading-order value vs brute-force quadrature for the spherical-wave spectrum
// along a ray at 60 degrees from the z axis.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "asx/asx.hpp"

int main() {
  const double k0 = 1.0;
  const auto f = asx::SpectrumFunction::weyl();
  const double theta = std::cos(std::numbers::pi / 3.0);

  std::printf("%8s %24s %24s %12s\n", "k0r", "leading order", "oracle", "rel. diff");
  for (double k0r : {10.0, 40.0, 160.0}) {
    const auto p = asx::point_from(theta, k0r, k0, 0.0);
    const auto lo = asx::leading_order(f, p, k0);
    const auto o = asx::oracle_eval(f, p, k0, asx::QuadratureConfig{});
    std::printf("%8.1f %11.8f%+11.8fi %11.8f%+11.8fi %12.3e\n", k0r, lo.value.real(), lo.value.imag(),
                o.value.real(), o.value.imag(), std::abs(lo.value - o.value) / std::abs(o.value));
  }
}
