#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "arlab/shift_functional.hpp"
#include "oracles.hpp"

using namespace arlab;

namespace {

// E Phi((x + b xi) / s) for xi ~ N(m, sd^2), in closed form.
double normal_shift_oracle(double x, double b, double m, double sd, double s = 1.0) {
  return oracle::Phi((x + b * m) / std::sqrt(s * s + b * b * sd * sd));
}

// Delta for G = N(0, 1) and Pi = N(m, sd^2) from the closed form above.
double delta_oracle(double x, const std::vector<double>& beta, double m, double sd) {
  double d = normal_shift_oracle(x, -1.0, m, sd) - oracle::Phi(x);
  for (double b : beta) d += normal_shift_oracle(x, b, m, sd) - oracle::Phi(x);
  return d;
}

}  // namespace

TEST(Shift, ZeroOutlierGivesZero) {
  for (double x : {-1.0, 0.0, 2.0}) {
    EXPECT_DOUBLE_EQ(delta(ShiftRequest{x, {0.5, -0.2}}).value, 0.0);
  }
}

TEST(Shift, PointMassClosedForm) {
  const ShiftRequest req{0.0, {0.5}, InnovationDist::normal(), OutlierDist::point_mass(1.0)};
  const double expected = oracle::Phi(-1.0) - 0.5 + oracle::Phi(0.5) - 0.5;
  EXPECT_NEAR(delta(req).value, expected, 1e-14);
  EXPECT_NEAR(expected, -0.14988, 1e-5);
}

TEST(Shift, NormalOutlierMatchesConvolution) {
  for (double x : {-2.0, -0.5, 0.0, 0.7, 2.5}) {
    const ShiftRequest req{x, {0.5, -0.3}, InnovationDist::normal(), OutlierDist::normal(0.4, 3.0)};
    EXPECT_NEAR(delta(req).value, delta_oracle(x, {0.5, -0.3}, 0.4, 3.0), 1e-9) << x;
  }
}

TEST(Shift, ExpectedShiftedCdfAgainstSimpson) {
  const auto g = InnovationDist::student_t(5.0);
  const auto u = OutlierDist::uniform(-1.0, 3.0);
  const double ref_u = oracle::simpson([&](double s) { return g.cdf(0.3 + 0.7 * s); }, -1.0, 3.0) / 4.0;
  EXPECT_NEAR(expected_shifted_cdf(g, u, 0.3, 0.7), ref_u, 1e-9);

  const auto c = OutlierDist::cauchy(0.5, 2.0);
  auto integrand = [&](double t) {
    const double xi = 0.5 + 2.0 * std::tan(std::numbers::pi * (t - 0.5));
    return g.cdf(-0.4 + 0.6 * xi);
  };
  const double ref_c = oracle::simpson(integrand, 1e-9, 1.0 - 1e-9, 400000);
  EXPECT_NEAR(expected_shifted_cdf(g, c, -0.4, 0.6), ref_c, 1e-6);
}

TEST(Shift, DecaysInTheTails) {
  for (double x : {-20.0, 20.0}) {
    const ShiftRequest req{x, {0.5}, InnovationDist::normal(), OutlierDist::normal(0.0, 3.0)};
    EXPECT_LT(std::abs(delta(req).value), 1e-8) << x;
  }
}

TEST(Shift, OddForSymmetricLaws) {
  const OutlierDist pis[] = {OutlierDist::normal(0.0, 2.0), OutlierDist::cauchy(0.0, 1.0),
                             OutlierDist::atoms({-3.0, 3.0}, {0.5, 0.5})};
  for (const auto& pi : pis) {
    for (double x : {0.3, 1.0, 2.2}) {
      const ShiftRequest plus{x, {0.6}, InnovationDist::laplace(), pi};
      ShiftRequest minus = plus;
      minus.x = -x;
      EXPECT_NEAR(delta(plus).value, -delta(minus).value, 1e-9) << pi.describe();
      EXPECT_NEAR(delta_sym(plus).value, delta(plus).value, 1e-9) << pi.describe();
    }
  }
}

TEST(Shift, BoundedByOrderPlusOne) {
  const OutlierDist pis[] = {OutlierDist::point_mass(100.0), OutlierDist::cauchy(5.0, 0.1),
                             OutlierDist::uniform(-50.0, 50.0)};
  for (const auto& pi : pis) {
    for (double x : {-3.0, 0.0, 3.0}) {
      const ShiftRequest req{x, {0.9, -0.5, 0.2}, InnovationDist::normal(), pi};
      EXPECT_LE(std::abs(delta(req).value), 4.0);
    }
  }
}

TEST(Shift, MonteCarloAgreesWithQuadrature) {
  const OutlierDist pis[] = {OutlierDist::normal(1.0, 2.0), OutlierDist::cauchy(0.0, 1.0),
                             OutlierDist::uniform(-2.0, 4.0)};
  for (const auto& pi : pis) {
    ShiftRequest req{0.8, {0.5, 0.2}, InnovationDist::student_t(6.0), pi};
    const double q = delta(req).value;
    req.method = ShiftMethod::MonteCarlo;
    req.mc_draws = 200000;
    const ShiftValue mc = delta(req);
    EXPECT_GT(mc.std_error, 0.0);
    EXPECT_LT(std::abs(mc.value - q), 4.0 * mc.std_error) << pi.describe();
  }
}

TEST(Shift, MonteCarloIsSeeded) {
  ShiftRequest req{0.5, {0.5}, InnovationDist::normal(), OutlierDist::normal(0.0, 3.0), ShiftMethod::MonteCarlo, 1000, 3};
  EXPECT_EQ(delta(req).value, delta(req).value);
  const double a = delta(req).value;
  req.mc_seed = 4;
  EXPECT_NE(a, delta(req).value);
}
