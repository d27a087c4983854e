#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "arlab/config.hpp"
#include "arlab/errors.hpp"
#include "arlab/parallel.hpp"
#include "arlab/report_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace arlab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string input_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::size_t threads = 0;
};

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

json envelope(const RunConfig& rc) {
  return {{"subcommand", rc.subcommand},
          {"master_seed", rc.master_seed},
          {"config", {{"raw", rc.raw}, {"resolved", rc.resolved}}}};
}

std::vector<double> read_input(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(path + ": cannot open input file");
  try {
    return read_csv_column(in, column);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

int run_simulate(const RunConfig& rc, const Options& opt) {
  const auto& c = std::get<SimulateConfig>(rc.settings);
  auto streams = RngStreams::from_seed(c.seed);
  SamplePath path = simulate_clean(c.model, c.innovations.at(c.n), c.n, c.burn_in, streams);
  path = contaminate(std::move(path), c.contamination, streams.contamination);
  const fs::path dir(opt.out_dir);
  auto csv = open_output(dir / "path.csv");
  write_path_csv(path, csv);
  json doc = envelope(rc);
  doc["n"] = c.n;
  doc["contamination_rate"] = c.contamination.intensity(c.n);
  doc["contaminated_count"] = path.contaminated_count();
  write_json_file(doc, (dir / "simulate.json").string());
  std::cout << "wrote " << (dir / "path.csv").string() << " (" << path.contaminated_count()
            << " contaminated observations)\n";
  return 0;
}

int run_estimate(const RunConfig& rc, const Options& opt) {
  const auto& c = std::get<EstimateConfig>(rc.settings);
  std::vector<double> y;
  const ARModelSpec* truth = nullptr;
  std::optional<SamplePath> path;
  if (c.simulate) {
    if (!opt.input_path.empty()) throw ConfigError("--input cannot be combined with a 'simulate' section");
    auto streams = RngStreams::from_seed(c.simulate->seed);
    path = simulate_clean(c.simulate->model, c.simulate->innovations.at(c.simulate->n), c.simulate->n,
                          c.simulate->burn_in, streams);
    path = contaminate(std::move(*path), c.simulate->contamination, streams.contamination);
    y = path->y;
    truth = &c.simulate->model;
  } else {
    if (opt.input_path.empty()) throw ConfigError("estimate needs --input or a 'simulate' section");
    y = read_input(opt.input_path, "y");
  }
  const EstimateSet est = estimate(y, c.p, c.estimators, truth);
  const auto res = residuals(y, est.mu_hat, est.beta_hat);

  const fs::path dir(opt.out_dir);
  json doc = envelope(rc);
  doc["mu_hat"] = est.mu_hat;
  doc["beta_hat"] = est.beta_hat;
  doc["method_mu"] = to_string(est.method_mu);
  doc["method_beta"] = to_string(est.method_beta);
  doc["converged"] = est.converged;
  doc["iterations"] = est.iterations;
  doc["n"] = res.size();
  write_json_file(doc, (dir / "estimate.json").string());
  auto csv = open_output(dir / "residuals.csv");
  csv << "residual\n";
  csv.precision(17);
  for (double r : res) csv << r << '\n';
  std::cout << "mu_hat = " << format_number(est.mu_hat) << ", beta_hat = [";
  for (std::size_t j = 0; j < est.beta_hat.size(); ++j) std::cout << (j ? ", " : "") << format_number(est.beta_hat[j]);
  std::cout << "]" << (est.converged ? "" : " (not converged)") << '\n';
  return est.converged ? 0 : kExitRuntime;
}

int run_shift(const RunConfig& rc, const Options& opt) {
  const auto& c = std::get<ShiftConfig>(rc.settings);
  const InnovationDist& base = c.g0 ? *c.g0 : c.g;
  const bool sym = base.is_symmetric();
  json rows = json::array();
  for (double x : c.x_grid) {
    ShiftRequest req{x, c.beta, c.g, c.pi, c.method, c.mc_draws, c.seed};
    const ShiftValue d = delta(req);
    json row{{"x", x}, {"delta", d.value}, {"delta_se", d.std_error}};
    if (sym) {
      req.g = base;
      const ShiftValue ds = delta_sym(req);
      row["delta_sym"] = ds.value;
      row["delta_sym_se"] = ds.std_error;
    } else {
      row["delta_sym"] = nullptr;
    }
    rows.push_back(row);
    std::cout << "x = " << format_number(x) << "  delta = " << format_number(d.value) << '\n';
  }
  json doc = envelope(rc);
  doc["symmetric_base"] = sym;
  doc["values"] = rows;
  write_json_file(doc, (fs::path(opt.out_dir) / "shift.json").string());
  return 0;
}

int run_verify(const RunConfig& rc, const Options& opt) {
  const auto& c = std::get<ExperimentConfig>(rc.settings);
  const std::size_t threads = opt.threads ? opt.threads : default_thread_count();
  std::cout << "planned work: " << planned_steps(c) << " recursion steps on " << threads << " thread(s)\n";
  const ExpansionReport report = run_experiment(c, threads);
  const fs::path dir(opt.out_dir);
  json doc = report_to_json(report, rc.raw, rc.resolved);
  write_json_file(doc, (dir / "report.json").string());
  auto csv = open_output(dir / "summary.csv");
  write_summary_csv(report, csv);
  auto svg = open_output(dir / "remainder.svg");
  write_remainder_svg(report, svg);
  std::size_t unusable = 0;
  for (const auto& cell : report.cells) unusable += cell.unusable ? 1 : 0;
  std::cout << "wrote " << report.cells.size() << " cells to " << (dir / "report.json").string();
  if (unusable) std::cout << " (" << unusable << " flagged unusable)";
  std::cout << '\n';
  return 0;
}

int run_test_normality(const RunConfig& rc, const Options& opt) {
  const auto& c = std::get<TestNormalityConfig>(rc.settings);
  if (opt.input_path.empty()) throw ConfigError("test-normality needs --input residuals.csv");
  const auto res = read_input(opt.input_path, "residual");
  const TestReport report = chi_square_statistic(res, c.test);
  json doc = envelope(rc);
  doc["result"] = to_json(report);
  write_json_file(doc, (fs::path(opt.out_dir) / "test.json").string());
  std::cout << "T = " << format_number(report.statistic) << ", null law chi2(" << report.df << ")";
  for (double w : report.null_weights) std::cout << " + " << format_number(w) << " chi2(1)";
  std::cout << ", p = " << format_number(report.p_value) << (report.reject ? "  reject" : "  accept") << '\n';
  return 0;
}

int run_power(const RunConfig& rc, const Options& opt) {
  const auto& c = std::get<PowerConfig>(rc.settings);
  const std::size_t threads = opt.threads ? opt.threads : default_thread_count();
  const auto rows = run_level_power(c, threads);
  const fs::path dir(opt.out_dir);
  json doc = envelope(rc);
  json list = json::array();
  for (const auto& r : rows) list.push_back(to_json(r));
  doc["rows"] = list;
  write_json_file(doc, (dir / "power.json").string());
  auto csv = open_output(dir / "power.csv");
  write_power_csv(rows, csv);
  auto svg = open_output(dir / "power.svg");
  write_power_svg(rows, c.test.alpha, svg);
  for (const auto& r : rows)
    std::cout << r.label << ": rate " << format_number(r.rate) << " (SE " << format_number(r.std_error) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contaminated AR(p) residual-EDF laboratory"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub, bool config_required) {
    auto* cfg = sub->add_option("--config", opt.config_path, "JSON configuration file");
    if (config_required) cfg->required();
    sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Override the master seed");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate one contaminated AR path");
  add_common(simulate, true);
  auto* est = app.add_subcommand("estimate", "Estimate mu and beta, write residuals");
  add_common(est, true);
  est->add_option("--input", opt.input_path, "Observed series (t = 1-p..n): one column, or the y column of path.csv");
  auto* shift = app.add_subcommand("shift", "Evaluate the contamination shift on a grid");
  add_common(shift, true);
  auto* verify = app.add_subcommand("verify-expansion", "Monte Carlo check of the residual EDF expansion");
  add_common(verify, true);
  verify->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  verify->add_option("--replications", opt.replications, "Override the replication count");
  auto* normality = app.add_subcommand("test-normality", "Symmetrized chi-square normality test");
  add_common(normality, false);
  normality->add_option("--input", opt.input_path, "Residuals: one column, or the residual column of residuals.csv")->required();
  auto* power = app.add_subcommand("power-curve", "Empirical level and power of the normality test");
  add_common(power, true);
  power->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  power->add_option("--replications", opt.replications, "Override the replication count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  RunConfig rc;
  try {
    const json doc = opt.config_path.empty() ? json::object() : load_config_file(opt.config_path);
    rc = parse_and_validate(name, doc, CommandOverrides{opt.seed, opt.replications});
    fs::create_directories(opt.out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }

  try {
    if (name == "simulate") return run_simulate(rc, opt);
    if (name == "estimate") return run_estimate(rc, opt);
    if (name == "shift") return run_shift(rc, opt);
    if (name == "verify-expansion") return run_verify(rc, opt);
    if (name == "test-normality") return run_test_normality(rc, opt);
    return run_power(rc, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
