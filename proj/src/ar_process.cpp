#include "arlab/ar_process.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/random/normal_distribution.hpp>

#include "arlab/errors.hpp"
#include "arlab/format.hpp"

namespace arlab {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

double ARModelSpec::delta_beta() const {
  double d = 1.0;
  for (double b : beta) d -= b;
  return d;
}

StationarityResult check_stationary(std::span<const double> beta) {
  if (beta.empty()) throw InvalidInput("beta must have at least one coefficient");
  for (double b : beta) {
    if (!std::isfinite(b)) throw InvalidInput("beta has a non-finite coefficient");
  }
  const auto p = static_cast<Eigen::Index>(beta.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = beta[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  double max_mod = 0.0;
  for (const auto& root : solver.eigenvalues()) max_mod = std::max(max_mod, std::abs(root));
  return {max_mod < 1.0 - 1e-8, max_mod};
}

void validate_model(const ARModelSpec& model) {
  if (!std::isfinite(model.mu)) throw InvalidInput("mu must be finite");
  const auto st = check_stationary(model.beta);
  if (!st.stationary) {
    throw InvalidInput("model not stationary: root modulus " + format_number(st.max_root_modulus));
  }
}

// ---------------------------------------------------------------------------

OutlierDist::OutlierDist(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const outlier::Atoms& a) {
                   if (a.values.empty() || a.values.size() != a.weights.size())
                     throw InvalidInput("atoms: values and weights must be nonempty and equal length");
                   double total = 0.0;
                   for (std::size_t i = 0; i < a.values.size(); ++i) {
                     if (!std::isfinite(a.values[i])) throw InvalidInput("atoms: values must be finite");
                     if (!(a.weights[i] >= 0.0)) throw InvalidInput("atoms: weights must be >= 0");
                     total += a.weights[i];
                   }
                   if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("atoms: weights must sum to 1");
                 },
                 [](const outlier::Normal& d) {
                   if (!std::isfinite(d.mean) || !(d.sd > 0.0) || !std::isfinite(d.sd))
                     throw InvalidInput("outlier normal: need finite mean and sd > 0");
                 },
                 [](const outlier::Cauchy& d) {
                   if (!std::isfinite(d.location) || !(d.scale > 0.0) || !std::isfinite(d.scale))
                     throw InvalidInput("outlier cauchy: need finite location and scale > 0");
                 },
                 [](const outlier::Uniform& d) {
                   if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || !(d.lower < d.upper))
                     throw InvalidInput("outlier uniform: need finite lower < upper");
                 },
             },
             kind_);
}

OutlierDist OutlierDist::point_mass(double value) { return OutlierDist(outlier::Atoms{{value}, {1.0}}); }
OutlierDist OutlierDist::atoms(std::vector<double> values, std::vector<double> weights) {
  return OutlierDist(outlier::Atoms{std::move(values), std::move(weights)});
}
OutlierDist OutlierDist::normal(double mean, double sd) { return OutlierDist(outlier::Normal{mean, sd}); }
OutlierDist OutlierDist::cauchy(double location, double scale) {
  return OutlierDist(outlier::Cauchy{location, scale});
}
OutlierDist OutlierDist::uniform(double lower, double upper) {
  return OutlierDist(outlier::Uniform{lower, upper});
}

double OutlierDist::sample_one(Rng& rng) const {
  return std::visit(
      overloaded{
          [&rng](const outlier::Atoms& a) {
            if (a.values.size() == 1) return a.values.front();
            const double u = uniform01(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < a.values.size(); ++i) {
              acc += a.weights[i];
              if (u < acc) return a.values[i];
            }
            return a.values.back();
          },
          [&rng](const outlier::Normal& d) {
            return boost::random::normal_distribution<double>(d.mean, d.sd)(rng);
          },
          [&rng](const outlier::Cauchy& d) {
            return d.location + d.scale * std::tan(std::numbers::pi * (uniform01(rng) - 0.5));
          },
          [&rng](const outlier::Uniform& d) { return d.lower + (d.upper - d.lower) * uniform01(rng); },
      },
      kind_);
}

bool OutlierDist::is_symmetric() const {
  return std::visit(overloaded{
                        [](const outlier::Atoms& a) {
                          for (std::size_t i = 0; i < a.values.size(); ++i) {
                            double mirrored = 0.0;
                            for (std::size_t j = 0; j < a.values.size(); ++j)
                              if (a.values[j] == -a.values[i]) mirrored += a.weights[j];
                            if (std::abs(mirrored - a.weights[i]) > 1e-12) return false;
                          }
                          return true;
                        },
                        [](const outlier::Normal& d) { return d.mean == 0.0; },
                        [](const outlier::Cauchy& d) { return d.location == 0.0; },
                        [](const outlier::Uniform& d) { return d.lower == -d.upper; },
                    },
                    kind_);
}

std::string OutlierDist::describe() const {
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{
                 [&os](const outlier::Atoms& a) {
                   if (a.values.size() == 1) {
                     os << "point(" << a.values.front() << ")";
                     return;
                   }
                   os << "atoms(";
                   for (std::size_t i = 0; i < a.values.size(); ++i)
                     os << (i ? ";" : "") << a.weights[i] << "@" << a.values[i];
                   os << ")";
                 },
                 [&os](const outlier::Normal& d) { os << "normal(mean=" << d.mean << ",sd=" << d.sd << ")"; },
                 [&os](const outlier::Cauchy& d) {
                   os << "cauchy(location=" << d.location << ",scale=" << d.scale << ")";
                 },
                 [&os](const outlier::Uniform& d) { os << "uniform(" << d.lower << "," << d.upper << ")"; },
             },
             kind_);
  return os.str();
}

double ContaminationSpec::intensity(std::size_t n) const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidInput("contamination intensity must satisfy gamma >= 0");
  if (n == 0) throw InvalidInput("sample size must be positive");
  return std::min(1.0, gamma / std::sqrt(static_cast<double>(n)));
}

// ---------------------------------------------------------------------------

std::size_t SamplePath::contaminated_count() const {
  std::size_t c = 0;
  for (auto flag : z) c += flag;
  return c;
}

std::size_t default_burn_in(std::size_t p) { return 1000 + 10 * p; }

SamplePath simulate_clean(const ARModelSpec& model, const InnovationSource& innovations,
                          std::size_t n, std::size_t burn_in, RngStreams& streams) {
  validate_model(model);
  const std::size_t p = model.order();
  if (n < p + 1) throw InvalidInput("sample size n must be at least p + 1");
  if (burn_in < default_burn_in(p)) throw InvalidInput("burn_in must be at least 1000 + 10 p");

  // Warm-up from zeros; only the last p values are kept.
  std::vector<double> warm(p, 0.0);
  for (std::size_t s = 0; s < burn_in; ++s) {
    double next = 0.0;
    for (std::size_t j = 0; j < p; ++j) next += model.beta[j] * warm[p - 1 - j];
    next += source_sample(innovations, streams);
    for (std::size_t j = 0; j + 1 < p; ++j) warm[j] = warm[j + 1];
    warm[p - 1] = next;
  }

  SamplePath path;
  path.n = n;
  path.p = p;
  path.u.resize(n + p);
  path.eps.resize(n);
  std::copy(warm.begin(), warm.end(), path.u.begin());
  for (std::size_t i = p; i < n + p; ++i) {
    double next = 0.0;
    for (std::size_t j = 0; j < p; ++j) next += model.beta[j] * path.u[i - 1 - j];
    const double e = source_sample(innovations, streams);
    path.eps[i - p] = e;
    path.u[i] = next + e;
  }
  path.v.resize(n + p);
  for (std::size_t i = 0; i < n + p; ++i) path.v[i] = model.mu + path.u[i];
  path.y = path.v;
  path.z.assign(n + p, 0);
  path.xi.assign(n + p, 0.0);
  return path;
}

SamplePath contaminate(SamplePath path, const ContaminationSpec& cont, Rng& rng) {
  const double rate = cont.intensity(path.n);
  if (path.v.size() != path.n + path.p) throw InvalidInput("path has no clean series v");
  path.y.resize(path.v.size());
  path.z.resize(path.v.size());
  path.xi.resize(path.v.size());
  for (std::size_t i = 0; i < path.v.size(); ++i) {
    const bool hit = uniform01(rng) < rate;
    path.xi[i] = cont.pi.sample_one(rng);
    path.z[i] = hit ? 1 : 0;
    path.y[i] = hit ? path.v[i] + path.xi[i] : path.v[i];
  }
  return path;
}

void write_path_csv(const SamplePath& path, std::ostream& os) {
  os << "t,v,z,xi,y,eps\n";
  const auto p = static_cast<std::ptrdiff_t>(path.p);
  const auto n = static_cast<std::ptrdiff_t>(path.n);
  os.precision(17);
  for (std::ptrdiff_t t = 1 - p; t <= n; ++t) {
    const std::size_t i = path.index(t);
    os << t << ',' << path.v[i] << ',' << static_cast<int>(path.z[i]) << ',' << path.xi[i] << ',' << path.y[i]
       << ',';
    if (t >= 1) os << path.eps_at(t);
    os << '\n';
  }
}

}  // namespace arlab
