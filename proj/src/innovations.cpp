#include "arlab/innovations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

#include "arlab/errors.hpp"

namespace arlab {

namespace dist {
bool operator==(const Mixture& a, const Mixture& b) {
  return a.weights == b.weights && a.components == b.components;
}
}  // namespace dist

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Scale s such that s * T_df has variance sigma^2.
double t_scale(const dist::StudentT& d) { return d.sigma * std::sqrt((d.df - 2.0) / d.df); }

// Laplace scale b with variance 2 b^2 = sigma^2.
double laplace_b(const dist::Laplace& d) { return d.sigma / std::numbers::sqrt2; }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

InnovationDist::InnovationDist(Kind kind) : kind_(std::move(kind)) {
  std::visit(
      overloaded{
          [](const dist::Normal& d) {
            require(finite_positive(d.sigma), "normal: sigma must be finite and > 0");
            require(std::isfinite(d.mean), "normal: mean must be finite");
          },
          [](const dist::StudentT& d) {
            require(std::isfinite(d.df) && d.df > 2.0, "student-t: df must exceed 2");
            require(finite_positive(d.sigma), "student-t: sigma must be finite and > 0");
          },
          [](const dist::Laplace& d) {
            require(finite_positive(d.sigma), "laplace: sigma must be finite and > 0");
          },
          [](const dist::ScaleMixture& d) {
            require(d.weight >= 0.0 && d.weight <= 1.0, "scale-mixture: weight must lie in [0, 1]");
            require(finite_positive(d.sigma1) && finite_positive(d.sigma2),
                    "scale-mixture: sigmas must be finite and > 0");
          },
          [](const dist::Mixture& d) {
            require(!d.components.empty(), "mixture: needs at least one component");
            require(d.components.size() == d.weights.size(),
                    "mixture: components and weights differ in length");
            double total = 0.0;
            for (double w : d.weights) {
              require(std::isfinite(w) && w >= 0.0, "mixture: weights must be >= 0");
              total += w;
            }
            require(std::abs(total - 1.0) < 1e-12, "mixture: weights must sum to 1");
          },
      },
      kind_);
  if (std::holds_alternative<dist::Mixture>(kind_)) {
    require(std::abs(raw_mean()) < 1e-12 * std::max(1.0, sd()), "mixture: overall mean must be 0");
  }
}

InnovationDist InnovationDist::normal(double sigma) { return InnovationDist(dist::Normal{sigma, 0.0}); }
InnovationDist InnovationDist::student_t(double df, double sigma) {
  return InnovationDist(dist::StudentT{df, sigma});
}
InnovationDist InnovationDist::laplace(double sigma) { return InnovationDist(dist::Laplace{sigma}); }
InnovationDist InnovationDist::scale_mixture(double weight, double sigma1, double sigma2) {
  return InnovationDist(dist::ScaleMixture{weight, sigma1, sigma2});
}
InnovationDist InnovationDist::mixture(std::vector<InnovationDist> components,
                                       std::vector<double> weights) {
  return InnovationDist(dist::Mixture{std::move(components), std::move(weights)});
}

double InnovationDist::cdf(double x) const {
  return std::visit(
      overloaded{
          [x](const dist::Normal& d) { return normal_cdf((x - d.mean) / d.sigma); },
          [x](const dist::StudentT& d) {
            return boost::math::cdf(boost::math::students_t(d.df), x / t_scale(d));
          },
          [x](const dist::Laplace& d) {
            const double b = laplace_b(d);
            return x < 0.0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
          },
          [x](const dist::ScaleMixture& d) {
            return d.weight * normal_cdf(x / d.sigma1) + (1.0 - d.weight) * normal_cdf(x / d.sigma2);
          },
          [x](const dist::Mixture& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.components.size(); ++i) s += d.weights[i] * d.components[i].cdf(x);
            return std::clamp(s, 0.0, 1.0);
          },
      },
      kind_);
}

double InnovationDist::pdf(double x) const {
  return std::visit(
      overloaded{
          [x](const dist::Normal& d) { return normal_pdf((x - d.mean) / d.sigma) / d.sigma; },
          [x](const dist::StudentT& d) {
            const double s = t_scale(d);
            return boost::math::pdf(boost::math::students_t(d.df), x / s) / s;
          },
          [x](const dist::Laplace& d) {
            const double b = laplace_b(d);
            return std::exp(-std::abs(x) / b) / (2.0 * b);
          },
          [x](const dist::ScaleMixture& d) {
            return d.weight * normal_pdf(x / d.sigma1) / d.sigma1 +
                   (1.0 - d.weight) * normal_pdf(x / d.sigma2) / d.sigma2;
          },
          [x](const dist::Mixture& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.components.size(); ++i) s += d.weights[i] * d.components[i].pdf(x);
            return s;
          },
      },
      kind_);
}

double InnovationDist::pdf_deriv(double x) const {
  return std::visit(
      overloaded{
          [x](const dist::Normal& d) {
            const double z = (x - d.mean) / d.sigma;
            return -z * normal_pdf(z) / (d.sigma * d.sigma);
          },
          [x](const dist::StudentT& d) {
            const double s = t_scale(d);
            const double z = x / s;
            const double f = boost::math::pdf(boost::math::students_t(d.df), z);
            return -f * (d.df + 1.0) * z / (d.df + z * z) / (s * s);
          },
          [x](const dist::Laplace& d) {
            // Not differentiable at 0; the symmetric one-sided average is 0.
            if (x == 0.0) return 0.0;
            const double b = laplace_b(d);
            const double f = std::exp(-std::abs(x) / b) / (2.0 * b);
            return x > 0.0 ? -f / b : f / b;
          },
          [x](const dist::ScaleMixture& d) {
            auto term = [x](double s) {
              const double z = x / s;
              return -z * normal_pdf(z) / (s * s);
            };
            return d.weight * term(d.sigma1) + (1.0 - d.weight) * term(d.sigma2);
          },
          [x](const dist::Mixture& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.components.size(); ++i)
              s += d.weights[i] * d.components[i].pdf_deriv(x);
            return s;
          },
      },
      kind_);
}

double InnovationDist::quantile(double t) const {
  return bisect_quantile([this](double x) { return cdf(x); }, t, sd());
}

double InnovationDist::raw_mean() const {
  if (const auto* n = std::get_if<dist::Normal>(&kind_)) return n->mean;
  if (const auto* m = std::get_if<dist::Mixture>(&kind_)) {
    double s = 0.0;
    for (std::size_t i = 0; i < m->components.size(); ++i) s += m->weights[i] * m->components[i].raw_mean();
    return s;
  }
  return 0.0;
}

double InnovationDist::mean() const { return raw_mean(); }

double InnovationDist::variance() const {
  return std::visit(
      overloaded{
          [](const dist::Normal& d) { return d.sigma * d.sigma; },
          [](const dist::StudentT& d) { return d.sigma * d.sigma; },
          [](const dist::Laplace& d) { return d.sigma * d.sigma; },
          [](const dist::ScaleMixture& d) {
            return d.weight * d.sigma1 * d.sigma1 + (1.0 - d.weight) * d.sigma2 * d.sigma2;
          },
          [this](const dist::Mixture& d) {
            // Law of total variance around the overall mean.
            const double m = raw_mean();
            double s = 0.0;
            for (std::size_t i = 0; i < d.components.size(); ++i) {
              const double dm = d.components[i].raw_mean() - m;
              s += d.weights[i] * (d.components[i].variance() + dm * dm);
            }
            return s;
          },
      },
      kind_);
}

double InnovationDist::sd() const { return std::sqrt(variance()); }

double InnovationDist::sample_one(Rng& rng) const {
  return std::visit(
      overloaded{
          [&rng](const dist::Normal& d) {
            return boost::random::normal_distribution<double>(d.mean, d.sigma)(rng);
          },
          [&rng](const dist::StudentT& d) {
            return t_scale(d) * boost::random::student_t_distribution<double>(d.df)(rng);
          },
          [&rng](const dist::Laplace& d) {
            // Inverse cdf on (-1/2, 1/2); u = 0 maps to 0.
            const double u = uniform01(rng) - 0.5;
            const double b = laplace_b(d);
            return u < 0.0 ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
          },
          [&rng](const dist::ScaleMixture& d) {
            const double s = uniform01(rng) < d.weight ? d.sigma1 : d.sigma2;
            return boost::random::normal_distribution<double>(0.0, s)(rng);
          },
          [&rng](const dist::Mixture& d) {
            const double u = uniform01(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < d.components.size(); ++i) {
              acc += d.weights[i];
              if (u < acc) return d.components[i].sample_one(rng);
            }
            return d.components.back().sample_one(rng);
          },
      },
      kind_);
}

std::vector<double> InnovationDist::sample(Rng& rng, std::size_t count) const {
  std::vector<double> out(count);
  for (auto& v : out) v = sample_one(rng);
  return out;
}

bool InnovationDist::is_symmetric(double tol) const {
  const double s = sd();
  for (int i = 0; i <= 64; ++i) {
    const double x = s * 8.0 * i / 64.0;
    if (std::abs(cdf(x) + cdf(-x) - 1.0) > tol) return false;
  }
  return true;
}

std::string InnovationDist::describe() const {
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{
                 [&os](const dist::Normal& d) {
                   os << "normal(sigma=" << d.sigma;
                   if (d.mean != 0.0) os << ",mean=" << d.mean;
                   os << ")";
                 },
                 [&os](const dist::StudentT& d) { os << "student-t(df=" << d.df << ",sigma=" << d.sigma << ")"; },
                 [&os](const dist::Laplace& d) { os << "laplace(sigma=" << d.sigma << ")"; },
                 [&os](const dist::ScaleMixture& d) {
                   os << "scale-mixture(w=" << d.weight << ",sigma1=" << d.sigma1 << ",sigma2=" << d.sigma2 << ")";
                 },
                 [&os](const dist::Mixture& d) {
                   os << "mixture(";
                   for (std::size_t i = 0; i < d.components.size(); ++i) {
                     if (i) os << ";";
                     os << d.weights[i] << "*" << d.components[i].describe();
                   }
                   os << ")";
                 },
             },
             kind_);
  return os.str();
}

bool operator==(const InnovationDist& a, const InnovationDist& b) { return a.kind_ == b.kind_; }

// ---------------------------------------------------------------------------

LocalMixture::LocalMixture(InnovationDist g0, InnovationDist h, std::size_t n, double amplification)
    : g0_(std::move(g0)), h_(std::move(h)), n_(n) {
  if (n == 0) throw InvalidInput("local mixture: n must be positive");
  if (!(std::isfinite(amplification) && amplification >= 0.0))
    throw InvalidInput("local mixture: amplification must be finite and >= 0");
  weight_ = std::min(1.0, amplification / std::sqrt(static_cast<double>(n)));
}

double LocalMixture::cdf(double x) const { return (1.0 - weight_) * g0_.cdf(x) + weight_ * h_.cdf(x); }
double LocalMixture::pdf(double x) const { return (1.0 - weight_) * g0_.pdf(x) + weight_ * h_.pdf(x); }
double LocalMixture::pdf_deriv(double x) const {
  return (1.0 - weight_) * g0_.pdf_deriv(x) + weight_ * h_.pdf_deriv(x);
}
double LocalMixture::variance() const { return (1.0 - weight_) * g0_.variance() + weight_ * h_.variance(); }
double LocalMixture::quantile(double t) const {
  return bisect_quantile([this](double x) { return cdf(x); }, t, std::sqrt(variance()));
}

double LocalMixture::sample_one(Rng& variates, Rng& selector) const {
  const bool from_h = uniform01(selector) < weight_;
  return from_h ? h_.sample_one(variates) : g0_.sample_one(variates);
}

std::vector<double> LocalMixture::sample(Rng& variates, Rng& selector, std::size_t count) const {
  std::vector<double> out(count);
  for (auto& v : out) v = sample_one(variates, selector);
  return out;
}

double source_cdf(const InnovationSource& src, double x) {
  return std::visit([x](const auto& d) { return d.cdf(x); }, src);
}

double source_sample(const InnovationSource& src, RngStreams& streams) {
  if (const auto* g = std::get_if<InnovationDist>(&src)) return g->sample_one(streams.innovations);
  return std::get<LocalMixture>(src).sample_one(streams.innovations, streams.selector);
}

}  // namespace arlab
