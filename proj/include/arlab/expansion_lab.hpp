#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arlab/ar_process.hpp"
#include "arlab/edf.hpp"
#include "arlab/estimation.hpp"
#include "arlab/innovations.hpp"

namespace arlab {

/// Innovations of a scenario: a fixed G, or the local alternative
/// A_n = (1 - a/sqrt(n)) G0 + a/sqrt(n) H when `h` is set.
struct InnovationModel {
  InnovationDist g0 = InnovationDist::normal();
  std::optional<InnovationDist> h;
  double amplification = 1.0;

  bool is_local() const { return h.has_value(); }
  InnovationSource at(std::size_t n) const;
};

enum class RemainderKind { Expansion, Symmetrized };
std::string to_string(RemainderKind k);
RemainderKind parse_remainder_kind(const std::string& s);

struct Scenario {
  ARModelSpec model{{0.5}, 1.0};
  InnovationModel innovations;
  ContaminationSpec contamination;
  std::size_t n = 1000;
  std::vector<double> x_grid{-1.0, 0.0, 1.0};
  EstimatorConfig estimators;
  std::size_t replications = 400;
  std::uint64_t master_seed = 1;
  /// 0 selects default_burn_in(p).
  std::size_t burn_in = 0;
};

/// Sub-seed of one replication. Depends on (master, n, gamma, rep) only, so
/// scenarios that differ in innovations or estimators share random streams.
std::uint64_t replication_seed(std::uint64_t master, std::size_t n, double gamma, std::size_t rep);

struct Replication {
  SamplePath path;
  EstimateSet estimates;
  std::vector<double> residuals;
  bool valid = false;
  std::string invalid_reason;
};

/// Simulates, contaminates and estimates one replication of a scenario.
/// Estimator failures mark the replication invalid instead of throwing.
Replication simulate_replication(const Scenario& scenario, std::size_t rep);

/// True-parameter correction terms at a set of points: density g(x), the shift
/// Delta(x, Pi) and its symmetrized form Delta_S(x, Pi), all for the base law
/// (G in the fixed case, G0 under a local mixture).
class ExpansionTerms {
 public:
  struct Point {
    double x = 0.0;
    double density = 0.0;
    double delta = 0.0;
    double delta_sym = 0.0;
  };

  ExpansionTerms(const ARModelSpec& model, const InnovationDist& base, const OutlierDist& pi, double gamma,
                 std::span<const double> xs);

  /// Throws InvalidInput when x was not among the construction points.
  const Point& at(double x) const;
  double gamma() const { return gamma_; }
  double delta_beta() const { return delta_beta_; }
  const ARModelSpec& model() const { return model_; }
  bool base_symmetric() const { return base_symmetric_; }
  std::span<const Point> points() const { return points_; }

 private:
  ARModelSpec model_;
  double gamma_;
  double delta_beta_;
  bool base_symmetric_;
  std::vector<Point> points_;
};

/// EDFs of one replication: residuals (G-hat_n) and latent innovations (G_n).
class ReplicationEdfs {
 public:
  ReplicationEdfs(std::span<const double> residuals, std::span<const double> latent, double mu_error);

  /// sqrt(n) [G-hat_n(x) - G_n(x)], computed from integer counts.
  double scaled_difference(double x) const;
  /// sqrt(n) [S-hat_n(x) - S_n(x)].
  double scaled_sym_difference(double x) const;
  double mu_error() const { return mu_error_; }
  double sqrt_n() const { return sqrt_n_; }

 private:
  EdfView residual_edf_;
  EdfView latent_edf_;
  double mu_error_;
  double sqrt_n_;
};

/// sqrt(n)[G-hat_n(x) - G_n(x)] - g(x) delta(beta) sqrt(n)(mu_hat - mu) - gamma Delta(x, Pi).
double remainder_expansion(const ReplicationEdfs& edfs, double x, const ExpansionTerms& terms);
/// sqrt(n)[S-hat_n(x) - S_n(x)] - gamma Delta_S(x, Pi). Requires a symmetric base law.
double remainder_symmetrized(const ReplicationEdfs& edfs, double x, const ExpansionTerms& terms);

/// Fixed-G remainder; `terms` built from G.
double remainder_t11(const SamplePath& path, const EstimateSet& est, double x, const ExpansionTerms& terms);
/// Local-mixture remainder; `terms` built from G0, path simulated from A_n.
double remainder_t12(const SamplePath& path, const EstimateSet& est, double x, const ExpansionTerms& terms);
/// Symmetrized remainder without the location drift term.
double remainder_corollary(const SamplePath& path, const EstimateSet& est, double x, const ExpansionTerms& terms);

struct ReplicationOutcome {
  bool valid = false;
  /// One remainder per x in the scenario grid; empty when invalid.
  std::vector<double> remainders;
};

/// All replications of one scenario, indexed by replication id.
std::vector<ReplicationOutcome> run_scenario(const Scenario& scenario, RemainderKind kind, std::size_t threads);

// ---------------------------------------------------------------------------

struct DriftRow {
  double t = 0.0;
  double target = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double abs_diff = 0.0;
};

/// Monte Carlo mean of sqrt(n)[G_n(G0^{-1}(t)) - t] over latent samples from
/// A_n against its exact expectation H(G0^{-1}(t)) - t.
std::vector<DriftRow> drift_identity_check(const InnovationDist& g0, const InnovationDist& h, std::size_t n,
                                           std::span<const double> t_grid, std::size_t replications,
                                           std::uint64_t seed, std::size_t threads = 1);

// ---------------------------------------------------------------------------

struct ExperimentConfig {
  ARModelSpec model{{0.5}, 1.0};
  InnovationModel innovations;
  OutlierDist pi = OutlierDist::normal(0.0, 3.0);
  std::vector<std::size_t> n_list{250, 1000, 4000};
  std::vector<double> gamma_list{0.0, 1.0, 2.0};
  /// Declared bound Gamma; every swept gamma must satisfy gamma <= Gamma.
  double gamma_bound = 2.0;
  /// Empty selects {-2,-1,0,1,2} times the sd of the base law.
  std::vector<double> x_grid;
  EstimatorConfig estimators;
  std::size_t replications = 400;
  std::uint64_t master_seed = 20240601;
  std::size_t burn_in = 0;
  RemainderKind remainder = RemainderKind::Expansion;
  std::vector<double> thresholds{0.1, 0.25, 0.5};
};

inline constexpr std::array<double, 5> kReportQuantiles{0.05, 0.25, 0.5, 0.75, 0.95};
/// Share of invalid replications above which a cell is flagged unusable.
inline constexpr double kUnusableInvalidShare = 0.02;

struct CellSummary {
  std::size_t n = 0;
  double gamma = 0.0;
  double x = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  bool unusable = false;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> quantiles;
  std::vector<double> p_exceed;

  friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

struct ExpansionReport {
  std::uint64_t master_seed = 0;
  std::string remainder_kind;
  std::string method_mu;
  std::string method_beta;
  std::size_t replications = 0;
  std::vector<double> thresholds;
  std::vector<double> x_grid;
  /// Planned simulation work: total recursion steps over all cells.
  std::uint64_t planned_steps = 0;
  std::vector<CellSummary> cells;
  /// Runtime metadata; excluded from determinism comparisons.
  double runtime_seconds = 0.0;
  std::size_t threads = 1;

  friend bool operator==(const ExpansionReport&, const ExpansionReport&) = default;
};

/// Throws InvalidInput describing the first invalid setting.
void validate_experiment(const ExperimentConfig& cfg);
std::vector<double> resolved_x_grid(const ExperimentConfig& cfg);
std::uint64_t planned_steps(const ExperimentConfig& cfg);

/// Sweeps n x gamma, summarizing the remainder at each x. Deterministic given
/// master_seed regardless of the thread count.
ExpansionReport run_experiment(const ExperimentConfig& cfg, std::size_t threads);

/// Summary of a remainder sample; exposed for tests.
CellSummary summarize_cell(std::span<const double> values, std::size_t n_invalid, std::span<const double> thresholds);

}  // namespace arlab
