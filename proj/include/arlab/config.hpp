#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "arlab/ar_process.hpp"
#include "arlab/estimation.hpp"
#include "arlab/expansion_lab.hpp"
#include "arlab/format.hpp"
#include "arlab/innovations.hpp"
#include "arlab/normality_test.hpp"
#include "arlab/shift_functional.hpp"

namespace arlab {

using nlohmann::json;

/// Malformed or invalid configuration. The message names the offending field
/// path, e.g. "config.model.beta: model not stationary: root modulus 1.0".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Distribution documents: {"dist": "<tag>", ...parameters}.
InnovationDist parse_innovation(const json& j, const std::string& path);
json to_json(const InnovationDist& d);
OutlierDist parse_outlier(const json& j, const std::string& path);
json to_json(const OutlierDist& d);

struct SimulateConfig {
  ARModelSpec model;
  InnovationModel innovations;
  ContaminationSpec contamination;
  std::size_t n = 1000;
  std::size_t burn_in = 0;
  std::uint64_t seed = 1;
};

/// Estimation either on a simulated path (`simulate` present) or on an input
/// series supplied on the command line, in which case only `p` is needed.
struct EstimateConfig {
  std::size_t p = 1;
  std::optional<SimulateConfig> simulate;
  EstimatorConfig estimators;
};

struct ShiftConfig {
  std::vector<double> beta;
  InnovationDist g = InnovationDist::normal();
  /// Base law of the local-mixture shift Delta_0; defaults to g.
  std::optional<InnovationDist> g0;
  OutlierDist pi = OutlierDist::point_mass(0.0);
  std::vector<double> x_grid{-2.0, -1.0, 0.0, 1.0, 2.0};
  ShiftMethod method = ShiftMethod::Quadrature;
  std::size_t mc_draws = 1'000'000;
  std::uint64_t seed = 7;
};

struct TestNormalityConfig {
  ChiSquareConfig test;
};

struct CommandOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
};

/// A parsed, validated run: the document as given, the fully resolved
/// settings (defaults filled in) and the typed configuration.
struct RunConfig {
  std::string subcommand;
  json raw;
  json resolved;
  std::uint64_t master_seed = 0;
  std::variant<SimulateConfig, EstimateConfig, ShiftConfig, ExperimentConfig, TestNormalityConfig, PowerConfig>
      settings;
};

/// Checks keys and cross-field invariants (stationarity, gamma >= 0, cell
/// feasibility). Unknown keys are errors. Throws ConfigError.
RunConfig parse_and_validate(const std::string& subcommand, const json& doc, const CommandOverrides& overrides = {});

/// Reads and parses a JSON file; throws ConfigError when missing or malformed.
json load_config_file(const std::string& path);

json to_json(const SimulateConfig& c);
json to_json(const EstimateConfig& c);
json to_json(const ShiftConfig& c);
json to_json(const ExperimentConfig& c);
json to_json(const TestNormalityConfig& c);
json to_json(const PowerConfig& c);

}  // namespace arlab
