#include "arlab/expansion_lab.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include "arlab/errors.hpp"
#include "arlab/parallel.hpp"
#include "arlab/shift_functional.hpp"

namespace arlab {

InnovationSource InnovationModel::at(std::size_t n) const {
  if (h) return LocalMixture(g0, *h, n, amplification);
  return g0;
}

std::string to_string(RemainderKind k) { return k == RemainderKind::Expansion ? "expansion" : "symmetrized"; }

RemainderKind parse_remainder_kind(const std::string& s) {
  if (s == "expansion") return RemainderKind::Expansion;
  if (s == "symmetrized") return RemainderKind::Symmetrized;
  throw InvalidInput("unknown remainder kind '" + s + "' (expected expansion or symmetrized)");
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t n, double gamma, std::size_t rep) {
  return derive_seed(master, n, std::bit_cast<std::uint64_t>(gamma), rep);
}

Replication simulate_replication(const Scenario& scenario, std::size_t rep) {
  const std::size_t p = scenario.model.order();
  const std::size_t burn = scenario.burn_in == 0 ? default_burn_in(p) : scenario.burn_in;
  auto streams =
      RngStreams::from_seed(replication_seed(scenario.master_seed, scenario.n, scenario.contamination.gamma, rep));
  Replication r;
  r.path = simulate_clean(scenario.model, scenario.innovations.at(scenario.n), scenario.n, burn, streams);
  r.path = contaminate(std::move(r.path), scenario.contamination, streams.contamination);
  try {
    r.estimates = estimate(r.path.y, p, scenario.estimators, &scenario.model);
    if (!r.estimates.converged) {
      r.invalid_reason = "estimator did not converge";
      return r;
    }
    r.residuals = residuals(r.path.y, r.estimates.mu_hat, r.estimates.beta_hat);
    r.valid = true;
  } catch (const DegenerateInput& e) {
    r.invalid_reason = e.what();
  }
  return r;
}

// ---------------------------------------------------------------------------

ExpansionTerms::ExpansionTerms(const ARModelSpec& model, const InnovationDist& base, const OutlierDist& pi,
                               double gamma, std::span<const double> xs)
    : model_(model), gamma_(gamma), delta_beta_(model.delta_beta()), base_symmetric_(base.is_symmetric()) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be finite and >= 0");
  points_.reserve(xs.size());
  for (double x : xs) {
    ShiftRequest req{x, model.beta, base, pi};
    Point pt{x, base.pdf(x), delta(req).value, 0.0};
    pt.delta_sym = delta_sym(req).value;
    points_.push_back(pt);
  }
}

const ExpansionTerms::Point& ExpansionTerms::at(double x) const {
  for (const auto& pt : points_)
    if (pt.x == x) return pt;
  throw InvalidInput("expansion terms were not computed at the requested x");
}

ReplicationEdfs::ReplicationEdfs(std::span<const double> residuals, std::span<const double> latent,
                                 double mu_error)
    : residual_edf_(residuals), latent_edf_(latent), mu_error_(mu_error) {
  if (residuals.size() != latent.size()) throw InvalidInput("residual and latent samples differ in length");
  sqrt_n_ = std::sqrt(static_cast<double>(residuals.size()));
}

double ReplicationEdfs::scaled_difference(double x) const {
  const double diff = static_cast<double>(residual_edf_.count_le(x)) - static_cast<double>(latent_edf_.count_le(x));
  return diff / sqrt_n_;
}

double ReplicationEdfs::scaled_sym_difference(double x) const {
  const double plus = static_cast<double>(residual_edf_.count_le(x)) - static_cast<double>(latent_edf_.count_le(x));
  const double minus =
      static_cast<double>(residual_edf_.count_le(-x)) - static_cast<double>(latent_edf_.count_le(-x));
  return 0.5 * (plus - minus) / sqrt_n_;
}

double remainder_expansion(const ReplicationEdfs& edfs, double x, const ExpansionTerms& terms) {
  const auto& pt = terms.at(x);
  return edfs.scaled_difference(x) - pt.density * terms.delta_beta() * edfs.sqrt_n() * edfs.mu_error() -
         terms.gamma() * pt.delta;
}

double remainder_symmetrized(const ReplicationEdfs& edfs, double x, const ExpansionTerms& terms) {
  if (!terms.base_symmetric())
    throw PreconditionViolation("symmetrized expansion needs an innovation law symmetric about zero");
  return edfs.scaled_sym_difference(x) - terms.gamma() * terms.at(x).delta_sym;
}

namespace {

ReplicationEdfs edfs_for(const SamplePath& path, const EstimateSet& est, const ExpansionTerms& terms) {
  if (est.beta_hat.size() != path.p) throw InvalidInput("estimate order differs from path order");
  const auto res = residuals(path.y, est.mu_hat, est.beta_hat);
  return ReplicationEdfs(res, path.eps, est.mu_hat - terms.model().mu);
}

}  // namespace

double remainder_t11(const SamplePath& path, const EstimateSet& est, double x, const ExpansionTerms& terms) {
  return remainder_expansion(edfs_for(path, est, terms), x, terms);
}

double remainder_t12(const SamplePath& path, const EstimateSet& est, double x, const ExpansionTerms& terms) {
  return remainder_expansion(edfs_for(path, est, terms), x, terms);
}

double remainder_corollary(const SamplePath& path, const EstimateSet& est, double x, const ExpansionTerms& terms) {
  if (!terms.base_symmetric())
    throw PreconditionViolation("symmetrized expansion needs an innovation law symmetric about zero");
  return remainder_symmetrized(edfs_for(path, est, terms), x, terms);
}

std::vector<ReplicationOutcome> run_scenario(const Scenario& scenario, RemainderKind kind, std::size_t threads) {
  const ExpansionTerms terms(scenario.model, scenario.innovations.g0, scenario.contamination.pi,
                             scenario.contamination.gamma, scenario.x_grid);
  if (kind == RemainderKind::Symmetrized && !terms.base_symmetric())
    throw PreconditionViolation("symmetrized expansion needs an innovation law symmetric about zero");
  std::vector<ReplicationOutcome> out(scenario.replications);
  parallel_for(scenario.replications, threads, [&](std::size_t rep) {
    const Replication r = simulate_replication(scenario, rep);
    if (!r.valid) return;
    const ReplicationEdfs edfs(r.residuals, r.path.eps, r.estimates.mu_hat - scenario.model.mu);
    ReplicationOutcome o;
    o.valid = true;
    o.remainders.reserve(scenario.x_grid.size());
    for (double x : scenario.x_grid)
      o.remainders.push_back(kind == RemainderKind::Expansion ? remainder_expansion(edfs, x, terms)
                                                              : remainder_symmetrized(edfs, x, terms));
    out[rep] = std::move(o);
  });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<DriftRow> drift_identity_check(const InnovationDist& g0, const InnovationDist& h, std::size_t n,
                                           std::span<const double> t_grid, std::size_t replications,
                                           std::uint64_t seed, std::size_t threads) {
  for (double t : t_grid)
    if (!(t > 0.0 && t < 1.0)) throw InvalidInput("drift check: t must lie in (0, 1)");
  if (replications < 2) throw InvalidInput("drift check: need at least 2 replications");
  const LocalMixture mix(g0, h, n);
  std::vector<double> q(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) q[i] = g0.quantile(t_grid[i]);

  // values[rep][i] = sqrt(n) [G_n(q_i) - t_i]
  std::vector<std::vector<double>> values(replications);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  parallel_for(replications, threads, [&](std::size_t rep) {
    auto streams = RngStreams::from_seed(derive_seed(seed, n, rep));
    const EdfView edf(mix.sample(streams.innovations, streams.selector, n));
    auto& row = values[rep];
    row.resize(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) row[i] = sqrt_n * (edf.eval(q[i]) - t_grid[i]);
  });

  std::vector<DriftRow> rows;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double sum = 0.0;
    for (const auto& r : values) sum += r[i];
    const double m = sum / static_cast<double>(replications);
    double ss = 0.0;
    for (const auto& r : values) ss += (r[i] - m) * (r[i] - m);
    const double se = std::sqrt(ss / static_cast<double>(replications - 1) / static_cast<double>(replications));
    const double target = h.cdf(q[i]) - t_grid[i];
    rows.push_back({t_grid[i], target, m, se, std::abs(m - target)});
  }
  return rows;
}

// ---------------------------------------------------------------------------

std::vector<double> resolved_x_grid(const ExperimentConfig& cfg) {
  if (!cfg.x_grid.empty()) return cfg.x_grid;
  const double s = cfg.innovations.g0.sd();
  return {-2.0 * s, -1.0 * s, 0.0, 1.0 * s, 2.0 * s};
}

void validate_experiment(const ExperimentConfig& cfg) {
  validate_model(cfg.model);
  const std::size_t p = cfg.model.order();
  if (std::abs(cfg.innovations.g0.mean()) > 1e-12) throw InvalidInput("innovations: g0 must have mean 0");
  if (cfg.innovations.h && std::abs(cfg.innovations.h->mean()) > 1e-12)
    throw InvalidInput("innovations: h must have mean 0");
  if (cfg.n_list.empty() && !cfg.gamma_list.empty()) throw InvalidInput("sweep: n list is empty");
  for (std::size_t n : cfg.n_list)
    if (n < 2 * p + 10) throw InvalidInput("sweep: every n must be at least 2p + 10");
  if (!(cfg.gamma_bound >= 0.0) || !std::isfinite(cfg.gamma_bound))
    throw InvalidInput("sweep: gamma_bound must be finite and >= 0");
  for (double g : cfg.gamma_list) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidInput("sweep: gamma must satisfy gamma >= 0");
    if (g > cfg.gamma_bound) throw InvalidInput("sweep: gamma exceeds the declared bound gamma_bound");
  }
  for (double x : cfg.x_grid)
    if (!std::isfinite(x)) throw InvalidInput("sweep: x grid values must be finite");
  if (cfg.replications == 0) throw InvalidInput("sweep: replications must be >= 1");
  if (cfg.burn_in != 0 && cfg.burn_in < default_burn_in(p)) throw InvalidInput("burn_in must be at least 1000 + 10 p");
  if (cfg.remainder == RemainderKind::Symmetrized && !cfg.innovations.g0.is_symmetric())
    throw InvalidInput("symmetrized remainder needs an innovation law symmetric about zero");
  for (double d : cfg.thresholds)
    if (!(d > 0.0)) throw InvalidInput("thresholds must be positive");
  if (!(cfg.estimators.huber_k > 0.0)) throw InvalidInput("estimators: huber_k must be > 0");
  if (cfg.estimators.max_iter < 1) throw InvalidInput("estimators: max_iter must be >= 1");
  if (!(cfg.estimators.tol > 0.0)) throw InvalidInput("estimators: tol must be > 0");
}

std::uint64_t planned_steps(const ExperimentConfig& cfg) {
  const std::size_t p = cfg.model.order();
  const std::size_t burn = cfg.burn_in == 0 ? default_burn_in(p) : cfg.burn_in;
  std::uint64_t total = 0;
  for (std::size_t n : cfg.n_list) total += static_cast<std::uint64_t>(n + burn) * cfg.replications * cfg.gamma_list.size();
  return total;
}

namespace {

double quantile_type7(std::span<const double> sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

CellSummary summarize_cell(std::span<const double> values, std::size_t n_invalid, std::span<const double> thresholds) {
  CellSummary c;
  c.n_valid = values.size();
  c.n_invalid = n_invalid;
  const std::size_t total = c.n_valid + n_invalid;
  c.unusable = total > 0 && static_cast<double>(n_invalid) > kUnusableInvalidShare * static_cast<double>(total);
  c.p_exceed.assign(thresholds.size(), 0.0);
  c.quantiles.assign(kReportQuantiles.size(), 0.0);
  if (values.empty()) return c;

  double sum = 0.0;
  for (double v : values) sum += v;
  c.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - c.mean) * (v - c.mean);
    c.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < kReportQuantiles.size(); ++i) c.quantiles[i] = quantile_type7(sorted, kReportQuantiles[i]);
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    std::size_t hits = 0;
    for (double v : values) hits += std::abs(v) > thresholds[k] ? 1 : 0;
    c.p_exceed[k] = static_cast<double>(hits) / static_cast<double>(values.size());
  }
  return c;
}

ExpansionReport run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
  validate_experiment(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto xs = resolved_x_grid(cfg);

  ExpansionReport report;
  report.master_seed = cfg.master_seed;
  report.remainder_kind = to_string(cfg.remainder);
  report.method_mu = to_string(cfg.estimators.mu);
  report.method_beta = to_string(cfg.estimators.beta);
  report.replications = cfg.replications;
  report.thresholds = cfg.thresholds;
  report.x_grid = xs;
  report.planned_steps = planned_steps(cfg);
  report.threads = std::max<std::size_t>(1, threads);

  for (std::size_t n : cfg.n_list) {
    for (double gamma : cfg.gamma_list) {
      Scenario sc;
      sc.model = cfg.model;
      sc.innovations = cfg.innovations;
      sc.contamination = ContaminationSpec{gamma, cfg.pi};
      sc.n = n;
      sc.x_grid = xs;
      sc.estimators = cfg.estimators;
      sc.replications = cfg.replications;
      sc.master_seed = cfg.master_seed;
      sc.burn_in = cfg.burn_in;
      const auto outcomes = run_scenario(sc, cfg.remainder, threads);
      std::size_t invalid = 0;
      for (const auto& o : outcomes) invalid += o.valid ? 0 : 1;
      for (std::size_t ix = 0; ix < xs.size(); ++ix) {
        std::vector<double> values;
        values.reserve(outcomes.size());
        for (const auto& o : outcomes)
          if (o.valid) values.push_back(o.remainders[ix]);
        CellSummary cell = summarize_cell(values, invalid, cfg.thresholds);
        cell.n = n;
        cell.gamma = gamma;
        cell.x = xs[ix];
        report.cells.push_back(std::move(cell));
      }
    }
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace arlab
