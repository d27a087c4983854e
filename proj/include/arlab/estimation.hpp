#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arlab/ar_process.hpp"

namespace arlab {

enum class MuMethod { Median, HuberM, Oracle };
enum class BetaMethod { LeastSquares, GmMallows, Oracle };

std::string to_string(MuMethod m);
std::string to_string(BetaMethod m);
MuMethod parse_mu_method(const std::string& s);
BetaMethod parse_beta_method(const std::string& s);

struct EstimatorConfig {
  MuMethod mu = MuMethod::HuberM;
  BetaMethod beta = BetaMethod::GmMallows;
  double huber_k = 1.345;
  /// Mallows cutoff c is this quantile of the regressor norms.
  double mallows_quantile = 0.95;
  int max_iter = 100;
  double tol = 1e-8;
  /// Oracle mode only: mu_hat = mu + oracle_mu_shift / sqrt(n).
  double oracle_mu_shift = 0.0;
};

struct EstimateSet {
  double mu_hat = 0.0;
  std::vector<double> beta_hat;
  MuMethod method_mu = MuMethod::Oracle;
  BetaMethod method_beta = BetaMethod::Oracle;
  bool converged = true;
  int iterations = 0;
};

/// Median with the midpoint convention for even lengths.
double median(std::vector<double> values);
/// Raw median absolute deviation about the median (no consistency factor).
double mad(std::span<const double> values);

/// Location estimate from observations. Throws InvalidInput on empty input
/// and on MuMethod::Oracle (which needs the true value).
double estimate_mu(std::span<const double> y, MuMethod method, double huber_k = 1.345);

struct BetaFit {
  std::vector<double> beta;
  bool converged = true;
  int iterations = 0;
};

/// AR coefficients from the centered series u_hat by regressing u_hat[i] on
/// (u_hat[i-1], ..., u_hat[i-p]) for every i >= p. Throws DegenerateInput on a
/// singular design; non-convergence of gm-mallows is reported, not thrown.
BetaFit estimate_beta(std::span<const double> u_hat, std::size_t p, BetaMethod method,
                      const EstimatorConfig& cfg = {});

/// eps_hat_t = u_hat_t - sum_j beta_hat_j u_hat_{t-j}, u_hat_t = y_t - mu_hat,
/// for t = 1..n where y holds t = 1-p..n. Exactly n values.
std::vector<double> residuals(std::span<const double> y, double mu_hat, std::span<const double> beta_hat);

/// Full estimation step on an observed series y (t = 1-p..n). `truth` is
/// required for oracle methods and ignored otherwise.
EstimateSet estimate(std::span<const double> y, std::size_t p, const EstimatorConfig& cfg,
                     const ARModelSpec* truth = nullptr);

}  // namespace arlab
