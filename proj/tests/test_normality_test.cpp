#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <utility>

#include "arlab/errors.hpp"
#include "arlab/normality_test.hpp"
#include "oracles.hpp"

using namespace arlab;

namespace {

double inverse_phi(double t) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle::Phi(mid) < t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// T computed cell by cell: each residual r and its mirror -r add 1/2 to the
// cell (b_{j-1}, b_j] containing them.
double brute_force_statistic(const std::vector<double>& r, int k) {
  const double sd = std::sqrt(oracle::variance(r));
  std::vector<double> edges;
  for (int j = 1; j < k; ++j) edges.push_back(sd * inverse_phi(static_cast<double>(j) / k));
  edges[static_cast<std::size_t>(k / 2 - 1)] = 0.0;
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  auto cell = [&](double v) {
    std::size_t c = 0;
    while (c < edges.size() && v > edges[c]) ++c;
    return c;
  };
  for (double v : r) {
    counts[cell(v)] += 0.5;
    counts[cell(-v)] += 0.5;
  }
  const double e = static_cast<double>(r.size()) / k;
  double t = 0.0;
  for (double c : counts) t += (c - e) * (c - e) / e;
  return t;
}

}  // namespace

TEST(ChiSquare, DegreesOfFreedom) {
  EXPECT_EQ(degrees_of_freedom(ChiSquareConfig{8}), 2);
  EXPECT_EQ(degrees_of_freedom(ChiSquareConfig{12}), 4);
  EXPECT_THROW(validate_test_config(ChiSquareConfig{7}), InvalidInput);
  EXPECT_THROW(validate_test_config(ChiSquareConfig{4}), InvalidInput);
  EXPECT_THROW(validate_test_config(ChiSquareConfig{8, ScaleEstimator::Sd, 1.0}), InvalidInput);
}

TEST(ChiSquare, PerfectQuantileSampleGivesZero) {
  const int n = 80;
  std::vector<double> r;
  for (int i = 1; i <= n; ++i) r.push_back(inverse_phi((i - 0.5) / n));
  const auto rep = chi_square_statistic(r, ChiSquareConfig{});
  EXPECT_DOUBLE_EQ(rep.statistic, 0.0);
  EXPECT_DOUBLE_EQ(rep.p_value, 1.0);
  EXPECT_FALSE(rep.reject);
  for (double o : rep.observed) EXPECT_DOUBLE_EQ(o, 10.0);
}

TEST(ChiSquare, ConstantInputRejects) {
  const std::vector<double> r(100, 10.0);
  const auto rep = chi_square_statistic(r, ChiSquareConfig{});
  EXPECT_LT(rep.p_value, 1e-10);
  EXPECT_TRUE(rep.reject);
}

TEST(ChiSquare, ScaleAndSignInvariance) {
  Rng rng(3);
  const auto r = InnovationDist::student_t(4.0).sample(rng, 500);
  for (auto scale : {ScaleEstimator::Sd, ScaleEstimator::Mad}) {
    const ChiSquareConfig cfg{8, scale};
    const double t = chi_square_statistic(r, cfg).statistic;
    for (double c : {2.0, 0.25, -1.0, -4.0}) {
      std::vector<double> s = r;
      for (double& v : s) v *= c;
      EXPECT_EQ(chi_square_statistic(s, cfg).statistic, t) << c;
    }
  }
}

TEST(ChiSquare, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 60 + seed;
    const auto r = InnovationDist::laplace().sample(rng, n);
    for (int k : {6, 8}) {
      if (n < static_cast<std::size_t>(10 * k)) continue;
      EXPECT_NEAR(chi_square_statistic(r, ChiSquareConfig{k}).statistic, brute_force_statistic(r, k), 1e-9)
          << seed << " k=" << k;
    }
  }
}

TEST(ChiSquare, ObservedCountsAreMirrored) {
  Rng rng(8);
  const auto r = InnovationDist::normal().sample(rng, 333);
  const auto rep = chi_square_statistic(r, ChiSquareConfig{10});
  double total = 0.0;
  for (std::size_t j = 0; j < rep.observed.size(); ++j) {
    EXPECT_DOUBLE_EQ(rep.observed[j], rep.observed[rep.observed.size() - 1 - j]);
    total += rep.observed[j];
  }
  EXPECT_DOUBLE_EQ(total, 333.0);
  EXPECT_EQ(rep.edges.size(), 9u);
}

TEST(ChiSquare, RejectsTooFewResiduals) {
  const std::vector<double> r(79, 1.0);
  EXPECT_THROW(chi_square_statistic(r, ChiSquareConfig{}), InvalidInput);
}

TEST(ChiSquare, PValueMatchesClosedForm) {
  // Upper tail of chi-square(2) is exp(-t/2).
  for (double t : {0.0, 0.5, 3.0, 10.0}) EXPECT_NEAR(chi_square_p_value(t, 2), std::exp(-t / 2), 1e-14);
}

TEST(NullLaw, SdWeightIsLostFisherInformation) {
  // With the sd scale the single non-unit weight is 1 - I_grouped / I_full,
  // where I_full = 2 and I_grouped = sum_j a_j^2 / q over the folded cells.
  for (int k : {6, 8, 12}) {
    const double q = 2.0 / k;
    std::vector<double> cphi{0.0};
    for (int j = 1; j < k / 2; ++j) {
      const double c = inverse_phi(0.5 + static_cast<double>(j) / k);
      cphi.push_back(c * oracle::phi(c));
    }
    cphi.push_back(0.0);
    double info = 0.0;
    for (int j = 1; j <= k / 2; ++j) {
      const double a = 2.0 * (cphi[j] - cphi[j - 1]);
      info += a * a / q;
    }
    const auto law = null_law(ChiSquareConfig{k});
    EXPECT_EQ(law.df, k / 2 - 2);
    ASSERT_EQ(law.weights.size(), 1u);
    EXPECT_NEAR(law.weights[0], 1.0 - info / 2.0, 1e-9) << k;
  }
}

TEST(NullLaw, PValueClosedForms) {
  for (double t : {0.3, 2.0, 6.0, 12.0}) {
    // chi-square(2) + chi-square(1) is chi-square(3).
    const double chi3 = std::erfc(std::sqrt(t / 2)) + std::sqrt(2 * t / std::numbers::pi) * std::exp(-t / 2);
    EXPECT_NEAR(null_p_value(t, NullLaw{2, {1.0}}), chi3, 1e-10) << t;
    EXPECT_NEAR(null_p_value(t, NullLaw{0, {1.0, 1.0}}), std::exp(-t / 2), 1e-10) << t;
    EXPECT_NEAR(null_p_value(t, NullLaw{0, {0.4}}), std::erfc(std::sqrt(t / 0.8)), 1e-12) << t;
  }
  EXPECT_DOUBLE_EQ(null_p_value(0.0, NullLaw{1, {0.5}}), 1.0);
}

TEST(NullLaw, PValuesAreUniformForNormalSamples) {
  for (auto [k, scale] : {std::pair{8, ScaleEstimator::Sd}, std::pair{8, ScaleEstimator::Mad},
                          std::pair{6, ScaleEstimator::Mad}}) {
    const ChiSquareConfig cfg{k, scale};
    const int reps = 4000;
    int below_05 = 0, below_50 = 0;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng(1000 + static_cast<std::uint64_t>(rep));
      const double p = chi_square_statistic(InnovationDist::normal(1.7).sample(rng, 2000), cfg).p_value;
      below_05 += p < 0.05 ? 1 : 0;
      below_50 += p < 0.5 ? 1 : 0;
    }
    EXPECT_NEAR(below_05 / static_cast<double>(reps), 0.05, 4 * std::sqrt(0.05 * 0.95 / reps)) << k << to_string(scale);
    EXPECT_NEAR(below_50 / static_cast<double>(reps), 0.5, 4 * std::sqrt(0.25 / reps)) << k << to_string(scale);
  }
}

TEST(Power, PairedScenariosShareStreams) {
  PowerConfig cfg;
  cfg.replications = 40;
  cfg.scenarios = {PowerScenario{"a", 400}, PowerScenario{"b", 400}};
  const auto rows = run_level_power(cfg, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].decisions, rows[1].decisions);
  EXPECT_EQ(rows[0].decisions.size(), 40u);
  cfg.scenarios.pop_back();
  EXPECT_EQ(run_level_power(cfg, 1)[0].decisions, rows[0].decisions);
}
