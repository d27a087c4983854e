#include "arlab/normality_test.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "arlab/edf.hpp"
#include "arlab/errors.hpp"
#include "arlab/expansion_lab.hpp"
#include "arlab/parallel.hpp"

namespace arlab {

std::string to_string(ScaleEstimator s) { return s == ScaleEstimator::Mad ? "mad" : "sd"; }

ScaleEstimator parse_scale_estimator(const std::string& s) {
  if (s == "mad") return ScaleEstimator::Mad;
  if (s == "sd") return ScaleEstimator::Sd;
  throw InvalidInput("unknown scale estimator '" + s + "' (expected mad or sd)");
}

void validate_test_config(const ChiSquareConfig& cfg) {
  if (cfg.cells < 6 || cfg.cells % 2 != 0) throw InvalidInput("test: cells must be even and >= 6");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InvalidInput("test: alpha must lie in (0, 1)");
}

NullLaw null_law(const ChiSquareConfig& cfg) {
  validate_test_config(cfg);
  const int half = cfg.cells / 2;
  const double q = 2.0 / cfg.cells;
  const InnovationDist z = InnovationDist::normal();

  // Folded cells (c_{j-1}, c_j] of |Z| at sigma = 1. a_j is the derivative of
  // the cell probability in sigma; e_j = E[1{cell j} IF] and v = E[IF^2] for
  // the influence function IF of the scale estimator.
  std::vector<double> c(static_cast<std::size_t>(half) + 1), cphi(c.size(), 0.0);
  for (int j = 1; j < half; ++j) {
    c[j] = z.quantile(0.5 + static_cast<double>(j) / cfg.cells);
    cphi[j] = c[j] * z.pdf(c[j]);
  }
  c[half] = std::numeric_limits<double>::infinity();
  Eigen::VectorXd a(half), e(half);
  for (int j = 0; j < half; ++j) a[j] = 2.0 * (cphi[j + 1] - cphi[j]);
  double v = 0.0;
  if (cfg.scale == ScaleEstimator::Sd) {
    // IF = (z^2 - 1) / 2.
    e = -0.5 * a;
    v = 0.5;
  } else {
    // IF = (1/2 - 1{|z| <= m}) / (2 m phi(m)) with m the median of |Z|.
    const double m = z.quantile(0.75);
    const double denom = 2.0 * m * z.pdf(m);
    for (int j = 0; j < half; ++j) {
      const double inside = c[j] < m ? 2.0 * (z.cdf(std::min(c[j + 1], m)) - z.cdf(c[j])) : 0.0;
      e[j] = (0.5 * q - inside) / denom;
    }
    v = 0.25 / (denom * denom);
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(half, half) - Eigen::MatrixXd::Constant(half, half, q);
  cov += (e * a.transpose() + a * e.transpose() + v * a * a.transpose()) / q;

  NullLaw law;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  for (double lambda : eig.eigenvalues()) {
    if (std::abs(lambda) < 1e-9) continue;
    if (std::abs(lambda - 1.0) < 1e-9) {
      ++law.df;
    } else {
      law.weights.push_back(lambda);
    }
  }
  return law;
}

int degrees_of_freedom(const ChiSquareConfig& cfg) { return null_law(cfg).df; }

double scale_estimate(std::span<const double> residuals, ScaleEstimator scale) {
  if (residuals.size() < 2) throw InvalidInput("scale estimate needs at least 2 residuals");
  if (scale == ScaleEstimator::Mad) return 1.482602218505602 * mad(residuals);
  double mean = 0.0;
  for (double r : residuals) mean += r;
  mean /= static_cast<double>(residuals.size());
  double ss = 0.0;
  for (double r : residuals) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(residuals.size() - 1));
}

double chi_square_p_value(double statistic, int df) {
  if (!(statistic >= 0.0)) throw InvalidInput("chi-square statistic must be >= 0");
  if (std::isinf(statistic)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), statistic));
}

namespace {

// P(chi-square(df) + sum_{i >= from} w_i chi-square(1) > t), conditioning on
// one weighted component at a time.
double weighted_tail(double t, int df, const std::vector<double>& w, std::size_t from) {
  if (t <= 0.0) return 1.0;
  if (from == w.size()) return df == 0 ? 0.0 : boost::math::gamma_q(0.5 * df, 0.5 * t);
  const double zmax = std::sqrt(t / w[from]);
  const double beyond = boost::math::erfc(zmax / std::sqrt(2.0));
  auto f = [&](double zv) {
    return std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * zv * zv) *
           weighted_tail(t - w[from] * zv * zv, df, w, from + 1);
  };
  return beyond + boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, zmax, 10, 1e-12);
}

}  // namespace

double null_p_value(double statistic, const NullLaw& law) {
  if (!(statistic >= 0.0)) throw InvalidInput("chi-square statistic must be >= 0");
  if (std::isinf(statistic)) return 0.0;
  if (law.weights.empty()) return law.df == 0 ? 0.0 : chi_square_p_value(statistic, law.df);
  return std::clamp(weighted_tail(statistic, law.df, law.weights, 0), 0.0, 1.0);
}

TestReport chi_square_statistic(std::span<const double> residuals, const ChiSquareConfig& cfg) {
  validate_test_config(cfg);
  const std::size_t n = residuals.size();
  const auto k = static_cast<std::size_t>(cfg.cells);
  if (n < 10 * k) throw InvalidInput("test: need n >= 10 k residuals");
  const double expected = static_cast<double>(n) / static_cast<double>(k);
  if (expected < 5.0) throw InvalidInput("test: expected cell count below 5");
  for (double r : residuals)
    if (!std::isfinite(r)) throw InvalidInput("test: residuals must be finite");

  TestReport rep;
  rep.n = n;
  rep.alpha = cfg.alpha;
  rep.sigma_hat = scale_estimate(residuals, cfg.scale);
  const std::size_t half = k / 2;

  // Positive edges b_0 = 0 < b_1 < ... < b_{half-1}; b_half = +inf.
  const InnovationDist std_normal = InnovationDist::normal();
  std::vector<double> pos(half + 1);
  pos[0] = 0.0;
  for (std::size_t j = 1; j < half; ++j)
    pos[j] = rep.sigma_hat * std_normal.quantile(0.5 + static_cast<double>(j) / static_cast<double>(k));
  pos[half] = std::numeric_limits<double>::infinity();

  const EdfView edf(residuals);
  // n [S_n(b_j) - S_n(b_{j-1})] on the positive half-line; mirrored cells share it.
  auto sym_count = [&](double b) {
    if (std::isinf(b)) return static_cast<double>(n);
    return 0.5 * (static_cast<double>(edf.count_le(b)) + static_cast<double>(n) -
                  static_cast<double>(edf.count_le(-b)));
  };
  std::vector<double> folded(half);
  for (std::size_t j = 1; j <= half; ++j) folded[j - 1] = sym_count(pos[j]) - sym_count(pos[j - 1]);

  rep.observed.resize(k);
  rep.expected.assign(k, expected);
  for (std::size_t j = 0; j < half; ++j) {
    rep.observed[half + j] = folded[j];
    rep.observed[half - 1 - j] = folded[j];
  }
  for (std::size_t j = half - 1; j >= 1; --j) rep.edges.push_back(-pos[j]);
  rep.edges.push_back(0.0);
  for (std::size_t j = 1; j < half; ++j) rep.edges.push_back(pos[j]);

  double t = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double d = rep.observed[c] - expected;
    t += d * d / expected;
  }
  rep.statistic = t;
  const NullLaw law = null_law(cfg);
  rep.df = law.df;
  rep.null_weights = law.weights;
  rep.p_value = null_p_value(t, law);
  rep.reject = rep.p_value < cfg.alpha;
  return rep;
}

// ---------------------------------------------------------------------------

void validate_power_config(const PowerConfig& cfg) {
  validate_model(cfg.model);
  validate_test_config(cfg.test);
  if (std::abs(cfg.g0.mean()) > 1e-12) throw InvalidInput("power: g0 must have mean 0");
  if (cfg.replications == 0) throw InvalidInput("power: replications must be >= 1");
  const std::size_t p = cfg.model.order();
  if (cfg.burn_in != 0 && cfg.burn_in < default_burn_in(p)) throw InvalidInput("burn_in must be at least 1000 + 10 p");
  for (const auto& sc : cfg.scenarios) {
    if (!(sc.gamma >= 0.0) || !std::isfinite(sc.gamma)) throw InvalidInput("power: gamma must satisfy gamma >= 0");
    if (sc.n < 10 * static_cast<std::size_t>(cfg.test.cells) || sc.n < 2 * p + 10)
      throw InvalidInput("power: n must be at least 10 k and 2p + 10");
    if (sc.h && std::abs(sc.h->mean()) > 1e-12) throw InvalidInput("power: h must have mean 0");
    if (!(sc.amplification >= 0.0) || !std::isfinite(sc.amplification))
      throw InvalidInput("power: amplification must be finite and >= 0");
  }
}

std::vector<PowerRow> run_level_power(const PowerConfig& cfg, std::size_t threads) {
  validate_power_config(cfg);
  std::vector<PowerRow> rows;
  for (const auto& sc : cfg.scenarios) {
    Scenario scenario;
    scenario.model = cfg.model;
    scenario.innovations = InnovationModel{cfg.g0, sc.h, sc.amplification};
    scenario.contamination = ContaminationSpec{sc.gamma, sc.pi};
    scenario.n = sc.n;
    scenario.estimators = cfg.estimators;
    scenario.replications = cfg.replications;
    scenario.master_seed = cfg.master_seed;
    scenario.burn_in = cfg.burn_in;

    PowerRow row;
    row.label = sc.label;
    row.n = sc.n;
    row.gamma = sc.gamma;
    row.h = sc.h ? sc.h->describe() : "null";
    row.amplification = sc.amplification;
    row.pi = sc.pi.describe();
    row.replications = cfg.replications;
    row.decisions.assign(cfg.replications, -1);
    parallel_for(cfg.replications, threads, [&](std::size_t rep) {
      const Replication r = simulate_replication(scenario, rep);
      if (!r.valid) return;
      row.decisions[rep] = chi_square_statistic(r.residuals, cfg.test).reject ? 1 : 0;
    });
    std::size_t valid = 0;
    for (int d : row.decisions) {
      if (d < 0) {
        ++row.n_invalid;
      } else {
        ++valid;
        row.rejections += static_cast<std::size_t>(d);
      }
    }
    if (valid > 0) {
      row.rate = static_cast<double>(row.rejections) / static_cast<double>(valid);
      row.std_error = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(valid));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace arlab
