#include "arlab/estimation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "arlab/errors.hpp"

namespace arlab {

namespace {

// 1 / Phi^{-1}(3/4): makes the MAD consistent for sigma under normality.
constexpr double kMadToSigma = 1.482602218505602;

Eigen::MatrixXd lag_matrix(std::span<const double> u, std::size_t p) {
  const auto rows = static_cast<Eigen::Index>(u.size() - p);
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, static_cast<Eigen::Index>(j)) = u[static_cast<std::size_t>(i) + p - 1 - j];
  return x;
}

Eigen::VectorXd response(std::span<const double> u, std::size_t p) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(u.size() - p));
  for (std::size_t i = p; i < u.size(); ++i) r(static_cast<Eigen::Index>(i - p)) = u[i];
  return r;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-12);
  if (qr.rank() < x.cols()) throw DegenerateInput("singular autoregression design (constant series?)");
  return qr.solve(y);
}

double quantile_of(std::vector<double> values, double q) {
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

BetaFit gm_mallows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const EstimatorConfig& cfg) {
  const Eigen::Index m = x.rows();
  std::vector<double> norms(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) norms[static_cast<std::size_t>(i)] = x.row(i).norm();
  const double c = quantile_of(norms, cfg.mallows_quantile);
  Eigen::VectorXd wx(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double nrm = norms[static_cast<std::size_t>(i)];
    wx(i) = (c > 0.0 && nrm > c) ? c / nrm : 1.0;
  }

  Eigen::VectorXd beta = least_squares(x, y);
  BetaFit fit;
  fit.converged = false;
  std::vector<double> resid(static_cast<std::size_t>(m));
  for (int it = 1; it <= cfg.max_iter; ++it) {
    fit.iterations = it;
    const Eigen::VectorXd r = y - x * beta;
    resid.assign(r.data(), r.data() + r.size());
    const double s = kMadToSigma * mad(resid);
    if (!(s > 0.0)) {
      fit.converged = true;
      break;
    }
    Eigen::VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = std::abs(r(i)) / s;
      w(i) = wx(i) * (a > cfg.huber_k ? cfg.huber_k / a : 1.0);
    }
    const Eigen::MatrixXd xtwx = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd xtwy = x.transpose() * w.asDiagonal() * y;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw DegenerateInput("singular weighted design in gm-mallows iteration");
    const Eigen::VectorXd next = ldlt.solve(xtwy);
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (change < cfg.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.beta = to_std(beta);
  return fit;
}

}  // namespace

std::string to_string(MuMethod m) {
  switch (m) {
    case MuMethod::Median: return "median";
    case MuMethod::HuberM: return "huber-m";
    case MuMethod::Oracle: return "oracle";
  }
  return "?";
}

std::string to_string(BetaMethod m) {
  switch (m) {
    case BetaMethod::LeastSquares: return "ls";
    case BetaMethod::GmMallows: return "gm-mallows";
    case BetaMethod::Oracle: return "oracle";
  }
  return "?";
}

MuMethod parse_mu_method(const std::string& s) {
  if (s == "median") return MuMethod::Median;
  if (s == "huber-m") return MuMethod::HuberM;
  if (s == "oracle") return MuMethod::Oracle;
  throw InvalidInput("unknown mu method '" + s + "' (expected median, huber-m or oracle)");
}

BetaMethod parse_beta_method(const std::string& s) {
  if (s == "ls") return BetaMethod::LeastSquares;
  if (s == "gm-mallows") return BetaMethod::GmMallows;
  if (s == "oracle") return BetaMethod::Oracle;
  throw InvalidInput("unknown beta method '" + s + "' (expected ls, gm-mallows or oracle)");
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mad(std::span<const double> values) {
  const double med = median({values.begin(), values.end()});
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(), [med](double v) { return std::abs(v - med); });
  return median(std::move(dev));
}

double estimate_mu(std::span<const double> y, MuMethod method, double huber_k) {
  if (y.empty()) throw InvalidInput("cannot estimate location from an empty sample");
  const double med = median({y.begin(), y.end()});
  switch (method) {
    case MuMethod::Median: return med;
    case MuMethod::Oracle: throw InvalidInput("oracle location needs the true model");
    case MuMethod::HuberM: break;
  }
  const double s = kMadToSigma * mad(y);
  if (!(s > 0.0)) return med;

  const double n = static_cast<double>(y.size());
  // score(m) = sum psi_k((y - m) / s), nonincreasing in m.
  auto score = [&](double m, double* slope) {
    double total = 0.0;
    std::size_t inside = 0;
    for (double v : y) {
      const double r = (v - m) / s;
      if (r > huber_k) {
        total += huber_k;
      } else if (r < -huber_k) {
        total -= huber_k;
      } else {
        total += r;
        ++inside;
      }
    }
    if (slope) *slope = -static_cast<double>(inside) / s;
    return total;
  };

  double lo = *std::min_element(y.begin(), y.end());
  double hi = *std::max_element(y.begin(), y.end());
  double m = med;
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double f = score(m, &slope);
    if (std::abs(f) < 1e-8 * n) return m;
    if (f > 0.0) {
      lo = m;
    } else {
      hi = m;
    }
    double next = slope < 0.0 ? m - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    m = next;
  }
  return m;
}

BetaFit estimate_beta(std::span<const double> u_hat, std::size_t p, BetaMethod method,
                      const EstimatorConfig& cfg) {
  if (p == 0) throw InvalidInput("autoregression order must be >= 1");
  if (u_hat.size() < 2 * p + 10) throw InvalidInput("series too short: need at least 2p + 10 values");
  for (double v : u_hat)
    if (!std::isfinite(v)) throw InvalidInput("series contains non-finite values");
  const Eigen::MatrixXd x = lag_matrix(u_hat, p);
  const Eigen::VectorXd y = response(u_hat, p);
  switch (method) {
    case BetaMethod::LeastSquares: return BetaFit{to_std(least_squares(x, y)), true, 1};
    case BetaMethod::GmMallows: return gm_mallows(x, y, cfg);
    case BetaMethod::Oracle: break;
  }
  throw InvalidInput("oracle coefficients need the true model");
}

std::vector<double> residuals(std::span<const double> y, double mu_hat, std::span<const double> beta_hat) {
  const std::size_t p = beta_hat.size();
  if (p == 0 || y.size() <= p) throw InvalidInput("residuals: y must cover t = 1-p..n with n >= 1");
  const std::size_t n = y.size() - p;
  std::vector<double> u(y.size());
  std::transform(y.begin(), y.end(), u.begin(), [mu_hat](double v) { return v - mu_hat; });
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t i = t + p;
    double e = u[i];
    for (std::size_t j = 0; j < p; ++j) e -= beta_hat[j] * u[i - 1 - j];
    out[t] = e;
  }
  return out;
}

EstimateSet estimate(std::span<const double> y, std::size_t p, const EstimatorConfig& cfg,
                     const ARModelSpec* truth) {
  const bool needs_truth = cfg.mu == MuMethod::Oracle || cfg.beta == BetaMethod::Oracle;
  if (needs_truth && truth == nullptr) throw InvalidInput("oracle estimation requires the true model");
  if (truth && truth->order() != p) throw InvalidInput("true model order differs from p");
  if (y.size() <= p) throw InvalidInput("series too short for the autoregression order");

  EstimateSet est;
  est.method_mu = cfg.mu;
  est.method_beta = cfg.beta;
  const double n = static_cast<double>(y.size() - p);
  est.mu_hat = cfg.mu == MuMethod::Oracle ? truth->mu + cfg.oracle_mu_shift / std::sqrt(n)
                                          : estimate_mu(y, cfg.mu, cfg.huber_k);
  if (cfg.beta == BetaMethod::Oracle) {
    est.beta_hat = truth->beta;
    est.converged = true;
    est.iterations = 0;
  } else {
    std::vector<double> u(y.size());
    std::transform(y.begin(), y.end(), u.begin(), [&](double v) { return v - est.mu_hat; });
    auto fit = estimate_beta(u, p, cfg.beta, cfg);
    est.beta_hat = std::move(fit.beta);
    est.converged = fit.converged;
    est.iterations = fit.iterations;
  }
  return est;
}

}  // namespace arlab
