#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "robkf/calibration.hpp"

using namespace robkf;

TEST_CASE("closed-form clipped moments match quadrature") {
  for (double sigma : {0.3, 1.0, 2.5}) {
    for (double b : {0.0, 0.2, 1.0, 3.0}) {
      const auto m = clipped_moments_1d(sigma * sigma, b);
      const auto [o1, o2] = oracle::clipped_moments_1d(sigma, b);
      CHECK(m.m1 == doctest::Approx(o1).epsilon(1e-9));
      CHECK(m.m2 == doctest::Approx(o2).epsilon(1e-9));
    }
  }
  const auto inf = clipped_moments_1d(1.0, kNoClipping);
  CHECK(inf.m1 == 0.0);
  CHECK(inf.m2 == 0.0);
  // b = 0: E|U| and E U²
  const auto zero = clipped_moments_1d(4.0, 0.0);
  CHECK(zero.m1 == doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)));
  CHECK(zero.m2 == doctest::Approx(4.0));
}

TEST_CASE("Monte Carlo moments agree with an independent simulation") {
  Matrix s(2, 2);
  s << 2.0, 0.5, 0.5, 1.0;
  const double b = 1.2;
  MonteCarloOptions mc;
  mc.samples = 200000;
  const auto m = clipped_moments(s, b, mc);

  std::mt19937_64 gen(99);
  std::normal_distribution<double> n01;
  const Eigen::LLT<Matrix> llt(s);
  const int n = 200000;
  double a1 = 0, a2 = 0;
  for (int i = 0; i < n; ++i) {
    Vector z(2);
    z << n01(gen), n01(gen);
    const double e = std::max(0.0, (llt.matrixL() * z).norm() - b);
    a1 += e;
    a2 += e * e;
  }
  a1 /= n;
  a2 /= n;
  CHECK(std::abs(m.m1 - a1) < 5.0 * std::sqrt(2.0) * m.se1);
  CHECK(std::abs(m.m2 - a2) < 5.0 * std::sqrt(2.0) * m.se2);
}

TEST_CASE("clipped moments are nonincreasing in b") {
  Matrix s(2, 2);
  s << 1.0, 0.3, 0.3, 0.5;
  double p1 = INFINITY, p2 = INFINITY;
  for (double b = 0.0; b < 5.0; b += 0.05) {
    const auto m = clipped_moments(s, b);
    CHECK(m.m1 <= p1);
    CHECK(m.m2 <= p2);
    p1 = m.m1;
    p2 = m.m2;
  }
}

TEST_CASE("radius calibration solves its equation and decreases in r") {
  const StepGeometry g = scalar_geometry(1.0, 0.618);
  double prev = INFINITY;
  for (double r : {0.05, 0.1, 0.2, 0.3, 0.5}) {
    const double b = calibrate_b_radius(g, r);
    const auto [m1, m2] = oracle::clipped_moments_1d(1.0, b);
    CHECK(std::abs((1.0 - r) * m1 - r * b) < 1e-8);
    CHECK(b < prev);
    prev = b;
  }
  CHECK(calibrate_b_radius(scalar_geometry(0.0, 1.0), 0.1) == 0.0);
  CHECK_THROWS_AS(calibrate_b_radius(g, 0.0), DomainError);
  CHECK_THROWS_AS(calibrate_b_radius(g, 1.0), DomainError);
}

TEST_CASE("efficiency calibration hits the requested ratio") {
  const StepGeometry g = scalar_geometry(1.0, 0.618);
  for (double d : {0.05, 0.1, 0.3}) {
    const double b = calibrate_b_efficiency(g, d);
    CHECK(efficiency_ratio(g, b) == doctest::Approx(1.0 + d).epsilon(1e-10));
  }
  CHECK(efficiency_ratio(g, kNoClipping) == 1.0);
  CHECK_THROWS_AS(calibrate_b_efficiency(g, 5.0), InfeasibleError);
  CHECK_THROWS_AS(calibrate_b_efficiency(g, 0.0), DomainError);
  CHECK(std::isinf(calibrate_b_efficiency(scalar_geometry(1.0, 0.0), 0.1)));
}

TEST_CASE("efficiency ratio in two dimensions matches brute force") {
  std::mt19937_64 gen(12);
  const ModelSpec m = oracle::random_model(gen, 2, 2);
  const FilterState pred = predict(init(m), m);
  const StepGeometry g = step_geometry(pred, m, Track::ao);
  const double b = calibrate_b_efficiency(g, 0.2);

  // joint (ΔX, ΔY) simulation of the clipped correction
  GaussianSampler joint(Vector::Zero(4), g.s_joint);
  RngStream s(77, 0);
  const int n = 200000;
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    const Vector d = joint(s);
    const Vector dx = d.head(2), dy = d.tail(2);
    const Vector u = pred.gain * dy;
    const Vector clip = u * std::min(1.0, b / u.norm());
    num += (dx - clip).squaredNorm();
    den += (dx - u).squaredNorm();
  }
  CHECK(num / den == doctest::Approx(1.2).epsilon(0.02));
}

TEST_CASE("IO geometry uses the residual covariance") {
  const ModelSpec m = steady_state_model();
  const FilterState lim = riccati_limit(m);
  const StepGeometry io = step_geometry(lim, m, Track::io);
  const double k = lim.gain(0, 0), d = lim.innovation_cov(0, 0);
  CHECK(io.s_corr(0, 0) == doctest::Approx((1 - k) * (1 - k) * d));
  const StepGeometry ao = step_geometry(lim, m, Track::ao);
  CHECK(ao.s_corr(0, 0) == doctest::Approx(k * k * d));
  CHECK(ao.trace_cond == doctest::Approx(k));
}

TEST_CASE("least favorable radius lies in the interval and balances the ratios") {
  const StepGeometry g = scalar_geometry(1.0, 0.618);
  const double rl = 0.05, ru = 0.5;
  const double r0 = least_favorable_radius(g, rl, ru);
  CHECK(r0 >= rl);
  CHECK(r0 <= ru);
  const auto lo = radius_terms(g, rl), hi = radius_terms(g, ru), at = radius_terms(g, r0);
  CHECK(std::abs(at.a / lo.a - at.bias / hi.bias) < 1e-6);
  CHECK_THROWS_AS(least_favorable_radius(g, 0.5, 0.1), DomainError);
}

TEST_CASE("calibrated policies") {
  const ModelSpec m = steady_state_model();
  const ClippingPolicy steady = calibrate_policy(m, 50, Track::ao, [] {
    Calibration c = Calibration::radius(0.1);
    c.steady_state = true;
    return c;
  }());
  CHECK_FALSE(steady.is_per_step());
  const ClippingPolicy per = calibrate_policy(m, 50, Track::ao, Calibration::radius(0.1));
  REQUIRE(per.heights().size() == 50);
  CHECK(per.height(50) == doctest::Approx(steady.height(1)).epsilon(1e-9));
  // steady-state AO variance is k²Δ = kΣ = 1 (golden-ratio identity)
  const FilterState ss = riccati_limit(m);
  const double k = ss.gain(0, 0);
  CHECK(k * k * ss.innovation_cov(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  const auto [m1, m2] = oracle::clipped_moments_1d(1.0, steady.height(1));
  CHECK(std::abs(0.9 * m1 - 0.1 * steady.height(1)) < 1e-8);
}
