#include "arlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "arlab/errors.hpp"

namespace arlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& child(const std::string& key) {
    if (!has(key)) fail(at(key), "missing required key");
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "missing required key");
    }
    const json& v = child(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "missing required key");
    }
    return as_count(child(key), at(key));
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = child(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "missing required key");
    }
    const json& v = child(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "missing required key");
    }
    const json& v = child(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::optional<std::vector<std::size_t>> fallback) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "missing required key");
    }
    const json& v = child(key);
    if (!v.is_array()) fail(at(key), "expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_count(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!used_.contains(key)) fail(at(key), "unknown key");
    }
  }

 private:
  static std::size_t as_count(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) fail(path, "expected a non-negative integer");
      return static_cast<std::size_t>(v.get<std::int64_t>());
    }
    fail(path, "expected a non-negative integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Runs a constructor/validator, turning InvalidInput into a ConfigError at `path`.
template <typename F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    fail(path, e.what());
  }
}

ARModelSpec parse_model(const json& j, const std::string& path) {
  Section s(j, path);
  ARModelSpec m;
  m.beta = s.numbers("beta");
  m.mu = s.number("mu", 0.0);
  if (s.has("p")) {
    const std::size_t p = s.count("p");
    if (p != m.beta.size()) fail(s.at("p"), "order p differs from the number of beta coefficients");
  }
  s.finish();
  guarded(s.at("beta"), [&] {
    validate_model(m);
    return 0;
  });
  return m;
}

json model_json(const ARModelSpec& m) { return {{"p", m.order()}, {"beta", m.beta}, {"mu", m.mu}}; }

void require_zero_mean(const InnovationDist& d, const std::string& path) {
  if (std::abs(d.mean()) > 1e-12) fail(path, "innovation law must have mean 0");
}

InnovationModel parse_innovation_model(const json& j, const std::string& path) {
  Section s(j, path);
  InnovationModel im;
  if (s.has("g") == s.has("g0")) fail(path, "give exactly one of 'g' (fixed law) or 'g0' (mixture base)");
  const std::string base_key = s.has("g") ? "g" : "g0";
  im.g0 = parse_innovation(s.child(base_key), s.at(base_key));
  require_zero_mean(im.g0, s.at(base_key));
  if (s.has("h")) {
    im.h = parse_innovation(s.child("h"), s.at("h"));
    require_zero_mean(*im.h, s.at("h"));
  }
  im.amplification = s.number("amplification", 1.0);
  if (!(im.amplification >= 0.0)) fail(s.at("amplification"), "must be >= 0");
  if (s.has("amplification") && !im.h) fail(s.at("amplification"), "only meaningful together with 'h'");
  s.finish();
  return im;
}

json innovation_model_json(const InnovationModel& im) {
  json j;
  if (im.h) {
    j["g0"] = to_json(im.g0);
    j["h"] = to_json(*im.h);
    j["amplification"] = im.amplification;
  } else {
    j["g"] = to_json(im.g0);
  }
  return j;
}

ContaminationSpec parse_contamination(const json& j, const std::string& path) {
  Section s(j, path);
  ContaminationSpec c;
  c.gamma = s.number("gamma", 0.0);
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) fail(s.at("gamma"), "contamination intensity must satisfy gamma >= 0");
  if (s.has("pi")) c.pi = parse_outlier(s.child("pi"), s.at("pi"));
  s.finish();
  return c;
}

EstimatorConfig parse_estimators(const json& j, const std::string& path) {
  Section s(j, path);
  EstimatorConfig e;
  e.mu = guarded(s.at("method_mu"), [&] { return parse_mu_method(s.text("method_mu", to_string(e.mu))); });
  e.beta = guarded(s.at("method_beta"), [&] { return parse_beta_method(s.text("method_beta", to_string(e.beta))); });
  e.huber_k = s.number("huber_k", e.huber_k);
  if (!(e.huber_k > 0.0)) fail(s.at("huber_k"), "must be > 0");
  e.mallows_quantile = s.number("mallows_quantile", e.mallows_quantile);
  if (!(e.mallows_quantile > 0.0 && e.mallows_quantile <= 1.0)) fail(s.at("mallows_quantile"), "must lie in (0, 1]");
  e.max_iter = static_cast<int>(s.count("max_iter", static_cast<std::size_t>(e.max_iter)));
  if (e.max_iter < 1) fail(s.at("max_iter"), "must be >= 1");
  e.tol = s.number("tol", e.tol);
  if (!(e.tol > 0.0)) fail(s.at("tol"), "must be > 0");
  e.oracle_mu_shift = s.number("oracle_mu_shift", 0.0);
  if (e.oracle_mu_shift != 0.0 && e.mu != MuMethod::Oracle)
    fail(s.at("oracle_mu_shift"), "only valid with method_mu = oracle");
  s.finish();
  return e;
}

json estimators_json(const EstimatorConfig& e) {
  return {{"method_mu", to_string(e.mu)},   {"method_beta", to_string(e.beta)},
          {"huber_k", e.huber_k},           {"mallows_quantile", e.mallows_quantile},
          {"max_iter", e.max_iter},         {"tol", e.tol},
          {"oracle_mu_shift", e.oracle_mu_shift}};
}

ChiSquareConfig parse_test(const json& j, const std::string& path) {
  Section s(j, path);
  ChiSquareConfig t;
  t.cells = static_cast<int>(s.count("cells", static_cast<std::size_t>(t.cells)));
  t.scale = guarded(s.at("scale"), [&] { return parse_scale_estimator(s.text("scale", to_string(t.scale))); });
  t.alpha = s.number("alpha", t.alpha);
  s.finish();
  guarded(path, [&] {
    validate_test_config(t);
    return 0;
  });
  return t;
}

json test_json(const ChiSquareConfig& t) {
  return {{"cells", t.cells}, {"scale", to_string(t.scale)}, {"alpha", t.alpha}};
}

SimulateConfig parse_simulate(const json& j, const std::string& path) {
  Section s(j, path);
  SimulateConfig c;
  c.model = parse_model(s.child("model"), s.at("model"));
  c.innovations = s.has("innovations") ? parse_innovation_model(s.child("innovations"), s.at("innovations"))
                                       : InnovationModel{};
  if (s.has("contamination")) c.contamination = parse_contamination(s.child("contamination"), s.at("contamination"));
  c.n = s.count("n");
  if (c.n < c.model.order() + 1) fail(s.at("n"), "must be at least p + 1");
  c.burn_in = s.count("burn_in", default_burn_in(c.model.order()));
  if (c.burn_in < default_burn_in(c.model.order())) fail(s.at("burn_in"), "must be at least 1000 + 10 p");
  c.seed = s.seed("seed", 1);
  s.finish();
  return c;
}

EstimateConfig parse_estimate(const json& j, const std::string& path) {
  Section s(j, path);
  EstimateConfig c;
  if (s.has("simulate")) {
    c.simulate = parse_simulate(s.child("simulate"), s.at("simulate"));
    c.p = c.simulate->model.order();
    if (s.has("p") && s.count("p") != c.p) fail(s.at("p"), "differs from the simulated model order");
  } else {
    c.p = s.count("p");
    if (c.p == 0) fail(s.at("p"), "must be >= 1");
  }
  if (s.has("estimators")) c.estimators = parse_estimators(s.child("estimators"), s.at("estimators"));
  const bool oracle = c.estimators.mu == MuMethod::Oracle || c.estimators.beta == BetaMethod::Oracle;
  if (oracle && !c.simulate) fail(path, "oracle estimators need a 'simulate' section with the true model");
  s.finish();
  return c;
}

ShiftConfig parse_shift(const json& j, const std::string& path) {
  Section s(j, path);
  ShiftConfig c;
  if (s.has("model") == s.has("beta")) fail(path, "give exactly one of 'beta' or 'model'");
  if (s.has("model")) {
    c.beta = parse_model(s.child("model"), s.at("model")).beta;
  } else {
    c.beta = s.numbers("beta");
    guarded(s.at("beta"), [&] { return check_stationary(c.beta); });
  }
  c.g = s.has("g") ? parse_innovation(s.child("g"), s.at("g")) : InnovationDist::normal();
  if (s.has("g0")) c.g0 = parse_innovation(s.child("g0"), s.at("g0"));
  if (s.has("pi")) c.pi = parse_outlier(s.child("pi"), s.at("pi"));
  c.x_grid = s.numbers("x_grid", c.x_grid);
  for (double x : c.x_grid)
    if (!std::isfinite(x)) fail(s.at("x_grid"), "values must be finite");
  const std::string method = s.text("method", "quadrature");
  if (method == "quadrature") {
    c.method = ShiftMethod::Quadrature;
  } else if (method == "monte-carlo") {
    c.method = ShiftMethod::MonteCarlo;
  } else {
    fail(s.at("method"), "expected quadrature or monte-carlo");
  }
  c.mc_draws = s.count("mc_draws", c.mc_draws);
  if (c.mc_draws < 2) fail(s.at("mc_draws"), "must be >= 2");
  c.seed = s.seed("seed", c.seed);
  s.finish();
  return c;
}

ExperimentConfig parse_experiment(const json& j, const std::string& path) {
  Section s(j, path);
  ExperimentConfig c;
  c.model = parse_model(s.child("model"), s.at("model"));
  c.innovations = parse_innovation_model(s.child("innovations"), s.at("innovations"));
  if (s.has("pi")) c.pi = parse_outlier(s.child("pi"), s.at("pi"));
  c.n_list = s.counts("n_list", c.n_list);
  c.gamma_list = s.numbers("gamma_list", c.gamma_list);
  for (double g : c.gamma_list)
    if (!(g >= 0.0)) fail(s.at("gamma_list"), "contamination intensity must satisfy gamma >= 0");
  double gmax = 0.0;
  for (double g : c.gamma_list) gmax = std::max(gmax, g);
  c.gamma_bound = s.number("gamma_bound", gmax);
  c.x_grid = s.numbers("x_grid", std::vector<double>{});
  if (s.has("estimators")) c.estimators = parse_estimators(s.child("estimators"), s.at("estimators"));
  c.replications = s.count("replications", c.replications);
  c.master_seed = s.seed("seed", c.master_seed);
  c.burn_in = s.count("burn_in", 0);
  c.remainder = guarded(s.at("remainder"), [&] { return parse_remainder_kind(s.text("remainder", "expansion")); });
  c.thresholds = s.numbers("thresholds", c.thresholds);
  s.finish();
  guarded(path, [&] {
    validate_experiment(c);
    return 0;
  });
  return c;
}

PowerConfig parse_power(const json& j, const std::string& path) {
  Section s(j, path);
  PowerConfig c;
  c.model = parse_model(s.child("model"), s.at("model"));
  if (s.has("g0")) c.g0 = parse_innovation(s.child("g0"), s.at("g0"));
  require_zero_mean(c.g0, s.at("g0"));
  const json& list = s.child("scenarios");
  if (!list.is_array()) fail(s.at("scenarios"), "expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section e(list[i], s.at("scenarios") + "[" + std::to_string(i) + "]");
    PowerScenario sc;
    sc.n = e.count("n");
    sc.gamma = e.number("gamma", 0.0);
    if (!(sc.gamma >= 0.0)) fail(e.at("gamma"), "contamination intensity must satisfy gamma >= 0");
    if (e.has("h")) {
      sc.h = parse_innovation(e.child("h"), e.at("h"));
      require_zero_mean(*sc.h, e.at("h"));
    }
    sc.amplification = e.number("amplification", 1.0);
    if (e.has("pi")) sc.pi = parse_outlier(e.child("pi"), e.at("pi"));
    sc.label = e.text("label", "scenario-" + std::to_string(i));
    e.finish();
    c.scenarios.push_back(std::move(sc));
  }
  if (s.has("estimators")) c.estimators = parse_estimators(s.child("estimators"), s.at("estimators"));
  if (s.has("test")) c.test = parse_test(s.child("test"), s.at("test"));
  c.replications = s.count("replications", c.replications);
  c.master_seed = s.seed("seed", c.master_seed);
  c.burn_in = s.count("burn_in", 0);
  s.finish();
  guarded(path, [&] {
    validate_power_config(c);
    return 0;
  });
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

InnovationDist parse_innovation(const json& j, const std::string& path) {
  Section s(j, path);
  const std::string tag = s.text("dist");
  auto build = [&]() -> InnovationDist {
    if (tag == "normal") return InnovationDist(dist::Normal{s.number("sigma", 1.0), s.number("mean", 0.0)});
    if (tag == "student-t") return InnovationDist(dist::StudentT{s.number("df"), s.number("sigma", 1.0)});
    if (tag == "laplace") return InnovationDist(dist::Laplace{s.number("sigma", 1.0)});
    if (tag == "scale-mixture")
      return InnovationDist(dist::ScaleMixture{s.number("weight"), s.number("sigma1"), s.number("sigma2")});
    if (tag == "mixture") {
      const json& comps = s.child("components");
      if (!comps.is_array()) fail(s.at("components"), "expected an array");
      std::vector<InnovationDist> parts;
      for (std::size_t i = 0; i < comps.size(); ++i)
        parts.push_back(parse_innovation(comps[i], s.at("components") + "[" + std::to_string(i) + "]"));
      return InnovationDist(dist::Mixture{std::move(parts), s.numbers("weights")});
    }
    fail(s.at("dist"), "unknown innovation law '" + tag + "' (normal, student-t, laplace, scale-mixture, mixture)");
  };
  InnovationDist d = guarded(path, build);
  s.finish();
  return d;
}

json to_json(const InnovationDist& d) {
  return std::visit(overloaded{
                        [](const dist::Normal& n) {
                          json j{{"dist", "normal"}, {"sigma", n.sigma}};
                          if (n.mean != 0.0) j["mean"] = n.mean;
                          return j;
                        },
                        [](const dist::StudentT& t) { return json{{"dist", "student-t"}, {"df", t.df}, {"sigma", t.sigma}}; },
                        [](const dist::Laplace& l) { return json{{"dist", "laplace"}, {"sigma", l.sigma}}; },
                        [](const dist::ScaleMixture& m) {
                          return json{{"dist", "scale-mixture"}, {"weight", m.weight}, {"sigma1", m.sigma1}, {"sigma2", m.sigma2}};
                        },
                        [](const dist::Mixture& m) {
                          json comps = json::array();
                          for (const auto& c : m.components) comps.push_back(to_json(c));
                          return json{{"dist", "mixture"}, {"components", comps}, {"weights", m.weights}};
                        },
                    },
                    d.kind());
}

OutlierDist parse_outlier(const json& j, const std::string& path) {
  Section s(j, path);
  const std::string tag = s.text("dist");
  auto build = [&]() -> OutlierDist {
    if (tag == "point") return OutlierDist::point_mass(s.number("value"));
    if (tag == "atoms") return OutlierDist::atoms(s.numbers("values"), s.numbers("weights"));
    if (tag == "normal") return OutlierDist::normal(s.number("mean", 0.0), s.number("sd"));
    if (tag == "cauchy") return OutlierDist::cauchy(s.number("location", 0.0), s.number("scale"));
    if (tag == "uniform") return OutlierDist::uniform(s.number("lower"), s.number("upper"));
    fail(s.at("dist"), "unknown outlier law '" + tag + "' (point, atoms, normal, cauchy, uniform)");
  };
  OutlierDist d = guarded(path, build);
  s.finish();
  return d;
}

json to_json(const OutlierDist& d) {
  return std::visit(overloaded{
                        [](const outlier::Atoms& a) {
                          if (a.values.size() == 1) return json{{"dist", "point"}, {"value", a.values.front()}};
                          return json{{"dist", "atoms"}, {"values", a.values}, {"weights", a.weights}};
                        },
                        [](const outlier::Normal& n) { return json{{"dist", "normal"}, {"mean", n.mean}, {"sd", n.sd}}; },
                        [](const outlier::Cauchy& c) {
                          return json{{"dist", "cauchy"}, {"location", c.location}, {"scale", c.scale}};
                        },
                        [](const outlier::Uniform& u) {
                          return json{{"dist", "uniform"}, {"lower", u.lower}, {"upper", u.upper}};
                        },
                    },
                    d.kind());
}

json to_json(const SimulateConfig& c) {
  return {{"model", model_json(c.model)},
          {"innovations", innovation_model_json(c.innovations)},
          {"contamination", {{"gamma", c.contamination.gamma}, {"pi", to_json(c.contamination.pi)}}},
          {"n", c.n},
          {"burn_in", c.burn_in},
          {"seed", c.seed}};
}

json to_json(const EstimateConfig& c) {
  json j{{"p", c.p}, {"estimators", estimators_json(c.estimators)}};
  if (c.simulate) j["simulate"] = to_json(*c.simulate);
  return j;
}

json to_json(const ShiftConfig& c) {
  json j{{"beta", c.beta},     {"g", to_json(c.g)},
         {"pi", to_json(c.pi)}, {"x_grid", c.x_grid},
         {"method", to_string(c.method)}, {"mc_draws", c.mc_draws},
         {"seed", c.seed}};
  if (c.g0) j["g0"] = to_json(*c.g0);
  return j;
}

json to_json(const ExperimentConfig& c) {
  return {{"model", model_json(c.model)},
          {"innovations", innovation_model_json(c.innovations)},
          {"pi", to_json(c.pi)},
          {"n_list", c.n_list},
          {"gamma_list", c.gamma_list},
          {"gamma_bound", c.gamma_bound},
          {"x_grid", resolved_x_grid(c)},
          {"estimators", estimators_json(c.estimators)},
          {"replications", c.replications},
          {"seed", c.master_seed},
          {"burn_in", c.burn_in == 0 ? default_burn_in(c.model.order()) : c.burn_in},
          {"remainder", to_string(c.remainder)},
          {"thresholds", c.thresholds}};
}

json to_json(const TestNormalityConfig& c) { return {{"test", test_json(c.test)}}; }

json to_json(const PowerConfig& c) {
  json scenarios = json::array();
  for (const auto& sc : c.scenarios) {
    json e{{"label", sc.label}, {"n", sc.n}, {"gamma", sc.gamma}, {"amplification", sc.amplification},
           {"pi", to_json(sc.pi)}};
    if (sc.h) e["h"] = to_json(*sc.h);
    scenarios.push_back(e);
  }
  return {{"model", model_json(c.model)},
          {"g0", to_json(c.g0)},
          {"scenarios", scenarios},
          {"estimators", estimators_json(c.estimators)},
          {"test", test_json(c.test)},
          {"replications", c.replications},
          {"seed", c.master_seed},
          {"burn_in", c.burn_in == 0 ? default_burn_in(c.model.order()) : c.burn_in}};
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": not a valid JSON document: " + e.what());
  }
}

RunConfig parse_and_validate(const std::string& subcommand, const json& doc, const CommandOverrides& overrides) {
  json patched = doc.is_null() ? json::object() : doc;
  if (!patched.is_object()) fail("config", "expected a JSON object at the top level");
  if (overrides.seed) {
    if (subcommand == "estimate" && patched.contains("simulate") && patched["simulate"].is_object())
      patched["simulate"]["seed"] = *overrides.seed;
    else if (subcommand != "estimate" && subcommand != "test-normality")
      patched["seed"] = *overrides.seed;
  }
  if (overrides.replications) {
    if (subcommand != "verify-expansion" && subcommand != "power-curve")
      fail("config.replications", "this subcommand has no replications");
    patched["replications"] = *overrides.replications;
  }

  RunConfig rc;
  rc.subcommand = subcommand;
  rc.raw = doc;
  const std::string root = "config";
  if (subcommand == "simulate") {
    auto c = parse_simulate(patched, root);
    rc.master_seed = c.seed;
    rc.resolved = to_json(c);
    rc.settings = std::move(c);
  } else if (subcommand == "estimate") {
    auto c = parse_estimate(patched, root);
    rc.master_seed = c.simulate ? c.simulate->seed : 0;
    rc.resolved = to_json(c);
    rc.settings = std::move(c);
  } else if (subcommand == "shift") {
    auto c = parse_shift(patched, root);
    rc.master_seed = c.seed;
    rc.resolved = to_json(c);
    rc.settings = std::move(c);
  } else if (subcommand == "verify-expansion") {
    auto c = parse_experiment(patched, root);
    rc.master_seed = c.master_seed;
    rc.resolved = to_json(c);
    rc.settings = std::move(c);
  } else if (subcommand == "test-normality") {
    Section s(patched, root);
    TestNormalityConfig c;
    if (s.has("test")) c.test = parse_test(s.child("test"), s.at("test"));
    s.finish();
    rc.resolved = to_json(c);
    rc.settings = c;
  } else if (subcommand == "power-curve") {
    auto c = parse_power(patched, root);
    rc.master_seed = c.master_seed;
    rc.resolved = to_json(c);
    rc.settings = std::move(c);
  } else {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  return rc;
}

}  // namespace arlab
