#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "arlab/ar_process.hpp"
#include "arlab/innovations.hpp"

namespace arlab {

enum class ShiftMethod { Quadrature, MonteCarlo };

std::string to_string(ShiftMethod m);

/// Inputs of the contamination shift
///   Delta(x, Pi) = sum_{j=0}^{p} ( E G(x + beta_j xi) - G(x) ),  beta_0 = -1.
/// `beta` holds beta_1..beta_p only; the leading -1 is implied.
struct ShiftRequest {
  double x = 0.0;
  std::vector<double> beta;
  InnovationDist g = InnovationDist::normal();
  OutlierDist pi = OutlierDist::point_mass(0.0);
  ShiftMethod method = ShiftMethod::Quadrature;
  std::size_t mc_draws = 1'000'000;
  std::uint64_t mc_seed = 7;
};

struct ShiftValue {
  double value = 0.0;
  /// Monte Carlo standard error; 0 for quadrature.
  double std_error = 0.0;
  ShiftMethod method = ShiftMethod::Quadrature;
};

/// E G(x + b xi) for xi ~ Pi. Atoms are summed directly; continuous laws use
/// adaptive Gauss-Kronrod with absolute tolerance well below 1e-8.
double expected_shifted_cdf(const InnovationDist& g, const OutlierDist& pi, double x, double b);

ShiftValue delta(const ShiftRequest& req);

/// Delta_S(x) = (Delta(x) - Delta(-x)) / 2. The Monte Carlo variant pairs both
/// evaluations on the same outlier draws.
ShiftValue delta_sym(const ShiftRequest& req);

}  // namespace arlab
