#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "asx/asymptotics.hpp"
#include "support.hpp"

using namespace asx;
using asx::testing::constant_field;
using asx::testing::rel_err;
using asx::testing::weyl_field;

namespace {

ObservationPoint random_point(std::mt19937_64& rng, double theta_min, double r_min, double r_max) {
  std::uniform_real_distribution<double> th(theta_min, 1.0), az(0.0, 2.0 * std::numbers::pi), rr(r_min, r_max);
  const double t = th(rng), a = az(rng), r = rr(rng);
  const double rho = r * std::sqrt(1.0 - t * t);
  return ObservationPoint::make(rho * std::cos(a), rho * std::sin(a), r * t);
}

}  // namespace

TEST(QuadraticCoeffs, Examples) {
  auto q = quadratic_coeffs(ObservationPoint::make(3, 0, 4));
  EXPECT_DOUBLE_EQ(q.a, 1.0);
  EXPECT_DOUBLE_EQ(q.b, 0.64);
  EXPECT_DOUBLE_EQ(q.c, 0.0);
  EXPECT_NEAR(q.det, 0.64, 1e-15);

  q = quadratic_coeffs(ObservationPoint::make(0, 0, 5));
  EXPECT_EQ(q.a, 1.0);
  EXPECT_EQ(q.b, 1.0);
  EXPECT_EQ(q.c, 0.0);
  EXPECT_EQ(q.det, 1.0);

  q = quadratic_coeffs(ObservationPoint::make(1, 2, 2));
  EXPECT_NEAR(q.a, 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(q.b, 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(q.c, 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(q.det, 4.0 / 9.0, 1e-15);
  EXPECT_TRUE(q.positive_definite());
}

TEST(QuadraticCoeffs, DeterminantIdentity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_point(rng, 0.01, 0.1, 1e4);
    const auto q = quadratic_coeffs(p);
    EXPECT_LT(std::abs(q.det - q.theta * q.theta), 1e-14);
    EXPECT_GT(q.a, 0.0);
    EXPECT_LE(q.a, 1.0);
    EXPECT_GT(q.b, 0.0);
    EXPECT_LE(q.b, 1.0);
    EXPECT_TRUE(q.positive_definite());
  }
}

TEST(TruncatedPhase, Examples) {
  const auto q = quadratic_coeffs(ObservationPoint::make(3, 0, 4));
  EXPECT_EQ(truncated_phase(q, 0.0, 0.0), cplx(0.0));
  const cplx u = truncated_phase(q, 0.1, 0.2);
  EXPECT_EQ(u.real(), 0.0);
  EXPECT_NEAR(u.imag(), 0.0356, 1e-16);
  const auto qc = quadratic_coeffs(ObservationPoint::make(1, 2, 2));
  EXPECT_EQ(truncated_phase(qc, -0.3, 0.7).real(), 0.0);
}

TEST(GaussianClosedForm, Examples) {
  QuadraticForm unit{1.0, 1.0, 0.0, 1.0, 1.0};
  EXPECT_NEAR(gaussian_closed_form(unit, 100.0).real(), std::numbers::pi / 100.0, 1e-16);
  EXPECT_NEAR(gaussian_closed_form(unit, 100.0).real(), asx::testing::gaussian_by_trapezoid(1, 1, 0, 100), 1e-13);
  const auto q = quadratic_coeffs(ObservationPoint::make(3, 0, 4));
  EXPECT_NEAR(gaussian_closed_form(q, 100.0).real(), std::numbers::pi / 80.0, 1e-16);
  EXPECT_NEAR(gaussian_closed_form(q, 100.0).real(), asx::testing::gaussian_by_trapezoid(q.a, q.b, q.c, 100), 1e-13);
  EXPECT_EQ(gaussian_closed_form(q, 200.0), gaussian_closed_form(q, 100.0) / 2.0);
}

TEST(GaussianClosedForm, AgreesWithNumericIntegrationOnRandomForms) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> k(1.0, 500.0);
  for (int i = 0; i < 100; ++i) {
    const auto q = quadratic_coeffs(random_point(rng, 0.2, 1.0, 10.0));
    const double kr = k(rng);
    const double num = asx::testing::gaussian_by_trapezoid(q.a, q.b, q.c, kr, 601);
    EXPECT_LT(std::abs(gaussian_closed_form(q, kr).real() - num) / num, 1e-10);
  }
}

TEST(GaussianClosedForm, RejectsDegenerateInput) {
  QuadraticForm flat{1.0, 0.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(gaussian_closed_form(flat, 10.0), DomainError);
  QuadraticForm unit{1.0, 1.0, 0.0, 1.0, 1.0};
  EXPECT_THROW(gaussian_closed_form(unit, 0.0), DomainError);
  EXPECT_THROW(gaussian_closed_form(unit, -1.0), DomainError);
}

TEST(LeadingOrder, WeylExample) {
  const auto r = leading_order(SpectrumFunction::weyl(), ObservationPoint::make(3, 0, 4), 1.0);
  EXPECT_NEAR(r.value.real(), 0.0567324, 1e-7);
  EXPECT_NEAR(r.value.imag(), -0.1917849, 1e-7);
  EXPECT_NEAR(r.validity_margin, 0.8 / std::sqrt(0.2), 1e-14);
  EXPECT_TRUE(r.is_valid);
  EXPECT_DOUBLE_EQ(r.k0r, 5.0);
}

TEST(LeadingOrder, WeylIsExact) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_point(rng, 0.05, 10.0, 1000.0);
    const double k0 = 0.5 + 0.1 * (i % 10);
    const auto r = leading_order(SpectrumFunction::weyl(), p, k0);
    EXPECT_LT(rel_err(r.value, weyl_field(p.x(), p.y(), p.z(), k0)), 1e-12);
  }
}

TEST(LeadingOrder, ConstantSpectrumOnAxis) {
  const auto r = leading_order(SpectrumFunction::constant(), ObservationPoint::make(0, 0, 100), 1.0);
  const cplx expect = cplx(0.0, -2.0 * std::numbers::pi) * std::exp(cplx(0.0, 100.0)) / 100.0;
  EXPECT_LT(rel_err(r.value, expect), 1e-14);
  EXPECT_NEAR(rel_err(r.value, constant_field(0, 0, 100, 1.0)), 0.01, 1e-4);
}

TEST(LeadingOrder, ConstantSpectrumErrorLaw) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_point(rng, 0.05, 5.0, 2000.0);
    const auto r = leading_order(SpectrumFunction::constant(), p, 1.0);
    const double measured = rel_err(r.value, constant_field(p.x(), p.y(), p.z(), 1.0));
    EXPECT_NEAR(measured, 1.0 / std::sqrt(1.0 + p.r() * p.r()), 1e-10);
  }
}

TEST(LeadingOrder, Linearity) {
  const auto p = ObservationPoint::make(1, -2, 7);
  const auto g = SpectrumFunction::gaussian(1.3);
  const cplx alpha(2.0, 3.0);
  const cplx a = leading_order(g.scaled(alpha), p, 1.0).value;
  const cplx b = alpha * leading_order(g, p, 1.0).value;
  EXPECT_LT(rel_err(a, b), 1e-15);
  const cplx c = leading_order(parse_spectrum("(2 + 3*i)*exp(-1.69*(kx^2 + ky^2)/4)"), p, 1.0).value;
  EXPECT_LT(rel_err(c, b), 1e-14);
}

TEST(LeadingOrder, RotationalSymmetryForRadialSpectra) {
  const double rho = 30.0, z = 40.0;
  for (const auto& f : {SpectrumFunction::gaussian(), SpectrumFunction::constant(), SpectrumFunction::weyl()}) {
    const cplx ref = leading_order(f, ObservationPoint::make(rho, 0.0, z), 1.0).value;
    for (double az = 0.1; az < 2.0 * std::numbers::pi; az += 0.37) {
      const auto p = ObservationPoint::make(rho * std::cos(az), rho * std::sin(az), z);
      EXPECT_LT(rel_err(leading_order(f, p, 1.0).value, ref), 1e-12);
    }
  }
}

TEST(LeadingOrder, ComputesAndFlagsBelowTheValidityGate) {
  // theta = 0.05 at k0r = 100 sits below theta0 = 0.1
  const double t = 0.05, r = 100.0;
  const auto p = ObservationPoint::make(r * std::sqrt(1 - t * t), 0.0, r * t);
  const auto res = leading_order(SpectrumFunction::constant(), p, 1.0);
  EXPECT_FALSE(res.is_valid);
  EXPECT_NEAR(res.validity_margin, 0.5, 1e-12);
  EXPECT_TRUE(std::isfinite(res.value.real()));
  EXPECT_EQ(res.spectrum_at_saddle, cplx(1.0));
}

TEST(LeadingOrder, PropagatesSpectrumFailures) {
  EXPECT_THROW(leading_order(parse_spectrum("1/(kx - 0.6)"), ObservationPoint::make(3, 0, 4), 1.0), EvalError);
  EXPECT_THROW(leading_order(SpectrumFunction::weyl(), ObservationPoint::make(3, 0, 4), 0.0), DomainError);
}

TEST(ValidityThreshold, Examples) {
  EXPECT_DOUBLE_EQ(validity_threshold(1.0, 100.0), 0.1);
  EXPECT_DOUBLE_EQ(validity_threshold(4.0, 25.0), 0.1);
  EXPECT_DOUBLE_EQ(validity_threshold(1.0, 1e6), 0.001);
  EXPECT_THROW(validity_threshold(0.0, 1.0), DomainError);
  EXPECT_THROW(validity_threshold(1.0, -1.0), DomainError);
}

TEST(SdpJacobian, IsMinusTwoIKzsSquared) {
  const auto s = saddle_point(ObservationPoint::make(3, 0, 4), 1.0);
  EXPECT_LT(std::abs(sdp_jacobian(s) - cplx(0.0, -2.0 * 0.64)), 1e-15);
}

TEST(LocalSdp, WeylOnAxis) {
  const auto p = ObservationPoint::make(0, 0, 50);
  const cplx v = local_sdp_integral(SpectrumFunction::weyl(), p, 1.0, 6.0 / std::sqrt(50.0), 64);
  EXPECT_LT(rel_err(v, weyl_field(0, 0, 50, 1.0)), 0.02);
}

TEST(LocalSdp, ZeroSpectrum) {
  const auto p = ObservationPoint::make(1, 2, 30);
  EXPECT_EQ(local_sdp_integral(parse_spectrum("0"), p, 1.0, default_half_width(p.r()), 32), cplx(0.0));
}

TEST(LocalSdp, RejectsBadParameters) {
  const auto p = ObservationPoint::make(0, 0, 50);
  EXPECT_THROW(local_sdp_integral(SpectrumFunction::weyl(), p, 1.0, 0.5, 15), ConfigError);
  EXPECT_THROW(local_sdp_integral(SpectrumFunction::weyl(), p, 1.0, 0.0, 32), ConfigError);
}

TEST(LocalSdp, UnderResolvedGridIsReported) {
  // a box far wider than the Gaussian decay scale with only 16 nodes
  const auto p = ObservationPoint::make(0, 0, 400);
  EXPECT_THROW(local_sdp_integral(SpectrumFunction::constant(), p, 1.0, 3.0, 16), ConvergenceError);
}

TEST(LocalSdp, AgreementWithLeadingOrderImprovesWithDistance) {
  const auto g = SpectrumFunction::gaussian();
  double prev = std::numeric_limits<double>::infinity();
  for (double k0r : {25.0, 100.0, 400.0}) {
    const double t = 0.8;
    const auto p = ObservationPoint::make(k0r * std::sqrt(1 - t * t), 0.0, k0r * t);
    const cplx lead = leading_order(g, p, 1.0).value;
    const cplx loc = local_sdp_integral(g, p, 1.0, default_half_width(k0r), 64);
    const double d = rel_err(loc, lead);
    EXPECT_LT(d, prev) << k0r;
    prev = d;
  }
}

TEST(LocalSdp, DeterministicAcrossRuns) {
  const auto p = ObservationPoint::make(10, 5, 60);
  const auto g = SpectrumFunction::gaussian();
  EXPECT_EQ(local_sdp_integral(g, p, 1.0, default_half_width(p.r()), 48),
            local_sdp_integral(g, p, 1.0, default_half_width(p.r()), 48));
}
