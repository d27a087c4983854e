#include "arlab/shift_functional.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "arlab/errors.hpp"
#include "arlab/random.hpp"

namespace arlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kQuadTol = 1e-11;
constexpr unsigned kQuadDepth = 20;

template <typename F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, kQuadDepth, kQuadTol);
}

void validate(const ShiftRequest& req) {
  if (!std::isfinite(req.x)) throw InvalidInput("shift: x must be finite");
  if (req.beta.empty()) throw InvalidInput("shift: beta must have at least one coefficient");
  for (double b : req.beta)
    if (!std::isfinite(b)) throw InvalidInput("shift: beta must be finite");
  if (req.method == ShiftMethod::MonteCarlo && req.mc_draws < 2)
    throw InvalidInput("shift: monte-carlo needs at least 2 draws");
}

// Per-draw summand sum_j [G(x + beta_j s) - G(x)] with beta_0 = -1.
double summand(const ShiftRequest& req, double x, double gx, double s) {
  double d = req.g.cdf(x - s) - gx;
  for (double b : req.beta) d += req.g.cdf(x + b * s) - gx;
  return d;
}

ShiftValue quadrature_delta(const ShiftRequest& req, double x) {
  const double gx = req.g.cdf(x);
  double total = expected_shifted_cdf(req.g, req.pi, x, -1.0) - gx;
  for (double b : req.beta) total += expected_shifted_cdf(req.g, req.pi, x, b) - gx;
  return {total, 0.0, ShiftMethod::Quadrature};
}

struct MeanAccumulator {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  double std_error() const {
    return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
  }
};

}  // namespace

std::string to_string(ShiftMethod m) { return m == ShiftMethod::Quadrature ? "quadrature" : "monte-carlo"; }

double expected_shifted_cdf(const InnovationDist& g, const OutlierDist& pi, double x, double b) {
  if (b == 0.0) return g.cdf(x);
  return std::visit(
      overloaded{
          [&](const outlier::Atoms& a) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.values.size(); ++i) s += a.weights[i] * g.cdf(x + b * a.values[i]);
            return s;
          },
          [&](const outlier::Normal& d) {
            const double inf = std::numeric_limits<double>::infinity();
            return integrate(
                [&](double t) { return g.cdf(x + b * (d.mean + d.sd * t)) * kInvSqrt2Pi * std::exp(-0.5 * t * t); },
                -inf, inf);
          },
          [&](const outlier::Cauchy& d) {
            // Probability-integral form keeps the integrand bounded on (0, 1).
            return integrate(
                [&](double w) {
                  return g.cdf(x + b * (d.location + d.scale * std::tan(std::numbers::pi * (w - 0.5))));
                },
                0.0, 1.0);
          },
          [&](const outlier::Uniform& d) {
            return integrate([&](double s) { return g.cdf(x + b * s); }, d.lower, d.upper) / (d.upper - d.lower);
          },
      },
      pi.kind());
}

ShiftValue delta(const ShiftRequest& req) {
  validate(req);
  if (req.method == ShiftMethod::Quadrature) return quadrature_delta(req, req.x);

  Rng rng(derive_seed(req.mc_seed, 0x5348));
  const double gx = req.g.cdf(req.x);
  MeanAccumulator acc;
  for (std::size_t i = 0; i < req.mc_draws; ++i) acc.add(summand(req, req.x, gx, req.pi.sample_one(rng)));
  return {acc.mean, acc.std_error(), ShiftMethod::MonteCarlo};
}

ShiftValue delta_sym(const ShiftRequest& req) {
  validate(req);
  if (req.method == ShiftMethod::Quadrature) {
    const double plus = quadrature_delta(req, req.x).value;
    const double minus = quadrature_delta(req, -req.x).value;
    return {0.5 * (plus - minus), 0.0, ShiftMethod::Quadrature};
  }
  Rng rng(derive_seed(req.mc_seed, 0x5348));
  const double gp = req.g.cdf(req.x);
  const double gm = req.g.cdf(-req.x);
  MeanAccumulator acc;
  for (std::size_t i = 0; i < req.mc_draws; ++i) {
    const double s = req.pi.sample_one(rng);
    acc.add(0.5 * (summand(req, req.x, gp, s) - summand(req, -req.x, gm, s)));
  }
  return {acc.mean, acc.std_error(), ShiftMethod::MonteCarlo};
}

}  // namespace arlab
