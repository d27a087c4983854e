#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "arlab/innovations.hpp"
#include "arlab/random.hpp"

namespace arlab {

/// Stationary AR(p) with mean mu:  v_t = mu + u_t,
/// u_t = beta_1 u_{t-1} + ... + beta_p u_{t-p} + eps_t.
struct ARModelSpec {
  std::vector<double> beta;
  double mu = 0.0;

  std::size_t order() const { return beta.size(); }
  /// 1 - beta_1 - ... - beta_p
  double delta_beta() const;
  /// Intercept of the original parametrization, nu = delta_beta * mu.
  double nu() const { return delta_beta() * mu; }
};

struct StationarityResult {
  bool stationary = false;
  double max_root_modulus = 0.0;
};

/// Largest modulus among the roots of z^p - beta_1 z^{p-1} - ... - beta_p,
/// computed as companion-matrix eigenvalues. Stationary iff it is below 1 - 1e-8.
StationarityResult check_stationary(std::span<const double> beta);

/// Throws InvalidInput unless the model is finite and stationary.
void validate_model(const ARModelSpec& model);

namespace outlier {
struct Atoms {
  std::vector<double> values;
  std::vector<double> weights;
  friend bool operator==(const Atoms&, const Atoms&) = default;
};
struct Normal {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const Normal&, const Normal&) = default;
};
struct Cauchy {
  double location = 0.0;
  double scale = 1.0;
  friend bool operator==(const Cauchy&, const Cauchy&) = default;
};
struct Uniform {
  double lower = -1.0;
  double upper = 1.0;
  friend bool operator==(const Uniform&, const Uniform&) = default;
};
}  // namespace outlier

/// Outlier law Pi. No moment conditions: Cauchy is allowed.
class OutlierDist {
 public:
  using Kind = std::variant<outlier::Atoms, outlier::Normal, outlier::Cauchy, outlier::Uniform>;

  explicit OutlierDist(Kind kind);

  static OutlierDist point_mass(double value);
  static OutlierDist atoms(std::vector<double> values, std::vector<double> weights);
  static OutlierDist normal(double mean, double sd);
  static OutlierDist cauchy(double location, double scale);
  static OutlierDist uniform(double lower, double upper);

  double sample_one(Rng& rng) const;
  /// Pi is symmetric about zero.
  bool is_symmetric() const;
  std::string describe() const;
  const Kind& kind() const { return kind_; }

  friend bool operator==(const OutlierDist&, const OutlierDist&) = default;

 private:
  Kind kind_;
};

struct ContaminationSpec {
  double gamma = 0.0;
  OutlierDist pi = OutlierDist::point_mass(0.0);

  /// gamma_n = min(1, gamma / sqrt(n)).
  double intensity(std::size_t n) const;
};

/// One simulated (and optionally contaminated) sample. Series indexed by
/// t = 1-p .. n are stored at position t + p - 1; eps holds t = 1 .. n.
struct SamplePath {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> y;
  std::vector<std::uint8_t> z;
  std::vector<double> xi;
  std::vector<double> eps;

  std::size_t index(std::ptrdiff_t t) const { return static_cast<std::size_t>(t + static_cast<std::ptrdiff_t>(p) - 1); }
  double u_at(std::ptrdiff_t t) const { return u[index(t)]; }
  double y_at(std::ptrdiff_t t) const { return y[index(t)]; }
  double eps_at(std::ptrdiff_t t) const { return eps[static_cast<std::size_t>(t - 1)]; }
  std::size_t contaminated_count() const;
};

/// Burn-in length used when none is configured: 1000 + 10 p.
std::size_t default_burn_in(std::size_t p);

/// Runs the recursion from zeros for `burn_in` steps; the last p values become
/// u_{1-p} .. u_0, then n further steps give u_1 .. u_n. y is set to v and z, xi
/// to zero. Requires a stationary model, n >= p + 1, burn_in >= default_burn_in(p).
SamplePath simulate_clean(const ARModelSpec& model, const InnovationSource& innovations,
                          std::size_t n, std::size_t burn_in, RngStreams& streams);

/// Overlays additive Bernoulli gross errors on every observed index 1-p .. n:
/// y_t = v_t + z_t xi_t with z_t ~ Bernoulli(gamma_n), xi_t ~ Pi.
SamplePath contaminate(SamplePath path, const ContaminationSpec& cont, Rng& rng);

/// Writes columns t,v,z,xi,y,eps (eps empty for pre-sample indices).
void write_path_csv(const SamplePath& path, std::ostream& os);

}  // namespace arlab
