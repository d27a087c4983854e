#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "arlab/random.hpp"

namespace arlab {

class InnovationDist;

namespace dist {

/// N(mean, sigma^2). A nonzero mean is only meaningful inside a Mixture whose
/// overall mean is zero.
struct Normal {
  double sigma = 1.0;
  double mean = 0.0;

  friend bool operator==(const Normal&, const Normal&) = default;
};

/// Student-t with `df` > 2 degrees of freedom rescaled to variance sigma^2.
struct StudentT {
  double df = 5.0;
  double sigma = 1.0;

  friend bool operator==(const StudentT&, const StudentT&) = default;
};

/// Laplace rescaled to variance sigma^2.
struct Laplace {
  double sigma = 1.0;

  friend bool operator==(const Laplace&, const Laplace&) = default;
};

/// weight * N(0, sigma1^2) + (1 - weight) * N(0, sigma2^2).
struct ScaleMixture {
  double weight = 0.9;
  double sigma1 = 1.0;
  double sigma2 = 3.0;

  friend bool operator==(const ScaleMixture&, const ScaleMixture&) = default;
};

struct Mixture {
  std::vector<InnovationDist> components;
  std::vector<double> weights;
};

bool operator==(const Mixture& a, const Mixture& b);

}  // namespace dist

/// Innovation distribution with the analytic pieces the expansions need:
/// cdf, density, density derivative, quantile and a seeded sampler.
/// Immutable once constructed.
class InnovationDist {
 public:
  using Kind = std::variant<dist::Normal, dist::StudentT, dist::Laplace,
                            dist::ScaleMixture, dist::Mixture>;

  /// Validates parameters; throws InvalidInput on bad ones or a nonzero mean.
  explicit InnovationDist(Kind kind);

  static InnovationDist normal(double sigma = 1.0);
  static InnovationDist student_t(double df, double sigma = 1.0);
  static InnovationDist laplace(double sigma = 1.0);
  static InnovationDist scale_mixture(double weight, double sigma1, double sigma2);
  static InnovationDist mixture(std::vector<InnovationDist> components,
                                std::vector<double> weights);

  double cdf(double x) const;
  double pdf(double x) const;
  double pdf_deriv(double x) const;
  /// Inverse cdf by bisection, |x - x*| <= 1e-10 * max(1, |x*|). t must lie in (0, 1).
  double quantile(double t) const;
  double mean() const;
  double variance() const;
  double sd() const;

  double sample_one(Rng& rng) const;
  std::vector<double> sample(Rng& rng, std::size_t count) const;

  /// Checks cdf(x) + cdf(-x) = 1 on a grid spanning +-8 sd.
  bool is_symmetric(double tol = 1e-12) const;

  std::string describe() const;
  const Kind& kind() const { return kind_; }

  friend bool operator==(const InnovationDist& a, const InnovationDist& b);

 private:
  // Mean of a component, allowed to be nonzero while a mixture is validated.
  double raw_mean() const;

  Kind kind_;
};

/// Local alternative (1 - w) G0 + w H with w = min(1, amplification / sqrt(n)).
/// amplification = 1 is the standard local mixture tied to sample size n.
class LocalMixture {
 public:
  LocalMixture(InnovationDist g0, InnovationDist h, std::size_t n, double amplification = 1.0);

  double weight() const { return weight_; }
  std::size_t n() const { return n_; }
  const InnovationDist& g0() const { return g0_; }
  const InnovationDist& h() const { return h_; }

  double cdf(double x) const;
  double pdf(double x) const;
  double pdf_deriv(double x) const;
  double quantile(double t) const;
  double variance() const;

  /// Component choice comes from `selector`, the variate itself from
  /// `variates` using the chosen component's own sampler.
  double sample_one(Rng& variates, Rng& selector) const;
  std::vector<double> sample(Rng& variates, Rng& selector, std::size_t count) const;

 private:
  InnovationDist g0_;
  InnovationDist h_;
  std::size_t n_;
  double weight_;
};

/// Source of innovations for a path: a fixed G or the n-dependent A_n.
using InnovationSource = std::variant<InnovationDist, LocalMixture>;

double source_cdf(const InnovationSource& src, double x);
double source_sample(const InnovationSource& src, RngStreams& streams);

/// Inverse of a nondecreasing cdf by bracketing and bisection.
template <typename Cdf>
double bisect_quantile(const Cdf& cdf, double t, double scale);

}  // namespace arlab

#include "arlab/detail/bisect_quantile.hpp"
