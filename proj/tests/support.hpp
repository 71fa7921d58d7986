#pragma once

// Test-only helpers: closed-form fields, independent quadrature, and the
// malformed-expression corpus. Nothing here calls into the code under test.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace asx::testing {

using cplx = std::complex<double>;

/// exp(i k0 r) / r
inline cplx weyl_field(double x, double y, double z, double k0) {
  const double r = std::sqrt(x * x + y * y + z * z);
  return std::exp(cplx(0.0, k0 * r)) / r;
}

/// Spectral integral of the constant spectrum: -2 pi d/dz (exp(i k0 r)/r).
inline cplx constant_field(double x, double y, double z, double k0) {
  const double r = std::sqrt(x * x + y * y + z * z);
  return -2.0 * std::numbers::pi * z * std::exp(cplx(0.0, k0 * r)) * (cplx(0.0, k0 * r) - 1.0) / (r * r * r);
}

inline double rel_err(cplx got, cplx want) { return std::abs(got - want) / std::abs(want); }

/// Integral of exp(-k (a u^2 + b v^2 + 2 c u v)) over the plane by the
/// tensor trapezoidal rule on a box covering the Gaussian out to e^-60.
inline double gaussian_by_trapezoid(double a, double b, double c, double k, int n = 801) {
  const double tr = a + b, det = a * b - c * c;
  const double lmin = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  const double half = std::sqrt(60.0 / (k * lmin));
  const double h = 2.0 * half / (n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = -half + i * h;
    const double wu = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    for (int j = 0; j < n; ++j) {
      const double v = -half + j * h;
      const double wv = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      sum += wu * wv * std::exp(-k * (a * u * u + b * v * v + 2.0 * c * u * v));
    }
  }
  return sum * h * h;
}

/// 200 inputs that are malformed by construction: each valid seed is broken
/// in one of several well-defined ways.
inline std::vector<std::string> malformed_corpus() {
  const std::vector<std::string> seeds = {
      "kx",          "i/(2*pi*kz)",   "exp(-(kx^2 + ky^2)/4)", "sqrt(k0^2 - kx^2)", "1 + kz",
      "cos(kx)*sin(ky)", "2.5*kx^3",  "(kx - ky)/(kz + 1)",    "-kz^2",             "pi*i",
  };
  const std::vector<std::pair<std::string, std::string>> breakers = {
      {"", " +"},      {"*", ""},        {"(", ""},       {"", ")"},      {"", " * * 2"},
      {"", "^x"},      {"", "^2.5"},     {"q + ", ""},    {"", " @"},     {"", ","},
      {"foo*", ""},    {"", " 1/0"},     {"", "(("},      {"", " 1e"},    {"", " ^"},
      {"..", ""},      {"", " kx kx"},   {"", " sqrt"},   {"", "/ "},     {"", "^(2)"},
  };
  std::vector<std::string> out;
  for (const auto& s : seeds)
    for (const auto& [pre, post] : breakers) out.push_back(pre + s + post);
  return out;
}

}  // namespace asx::testing
