#include "mgbench/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mgbench {

using mgps::ParameterError;
using nlohmann::json;

Experiment parse_experiment(const std::string& name) {
  if (name == "gm-bench") return Experiment::GmBench;
  if (name == "gauss-w2") return Experiment::GaussW2;
  if (name == "ablate-eta") return Experiment::AblateEta;
  if (name == "ablate-gradsteps") return Experiment::AblateGradSteps;
  if (name == "sample") return Experiment::Sample;
  throw ParameterError("unknown experiment '" + name +
                       "' (expected gm-bench, gauss-w2, ablate-eta, ablate-gradsteps or sample)");
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::GmBench: return "gm-bench";
    case Experiment::GaussW2: return "gauss-w2";
    case Experiment::AblateEta: return "ablate-eta";
    case Experiment::AblateGradSteps: return "ablate-gradsteps";
    case Experiment::Sample: return "sample";
  }
  return "unknown";
}

namespace {

std::vector<double> eta_grid(int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(static_cast<double>(i) / (points - 1));
  return out;
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  /// Rejects keys outside `allowed`.
  void only(std::initializer_list<const char*> allowed) const {
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!keys.count(it.key())) fail(key_path(it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void read(const char* key, int& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) fail(key_path(key), "expected an integer");
    out = v.get<int>();
  }
  void read(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(key_path(key), "expected a nonnegative integer");
    out = v.get<std::uint64_t>();
  }
  void read(const char* key, double& out) const {
    if (!has(key)) return;
    out = number(at(key), key_path(key));
  }
  void read(const char* key, bool& out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) fail(key_path(key), "expected true or false");
    out = at(key).get<bool>();
  }
  void read(const char* key, std::string& out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) fail(key_path(key), "expected a string");
    out = at(key).get<std::string>();
  }
  void read(const char* key, std::vector<double>& out) const {
    if (!has(key)) return;
    out = numbers(at(key), key_path(key));
  }
  void read(const char* key, std::vector<int>& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) fail(key_path(key), "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) fail(key_path(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
  }
  void read(const char* key, std::vector<std::string>& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) fail(key_path(key), "expected an array of strings");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(key_path(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
  }

  /// Numbers, plus the strings "inf" / "-inf" for unbounded values.
  static double number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    fail(where, "expected a number");
  }
  static std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ParameterError(where + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
};

void read_mgps(const Reader& r, MgpsSettings& m) {
  r.only({"eta", "ell", "lr", "grad_steps", "warm_start", "n_mc", "adam"});
  if (r.has("eta")) {
    double eta = 0.0;
    r.read("eta", eta);
    m.eta = eta;
  }
  if (r.has("ell")) {
    std::vector<int> ell;
    r.read("ell", ell);
    m.ell = std::move(ell);
  }
  r.read("lr", m.lr);
  if (r.has("grad_steps")) {
    const Reader g(r.at("grad_steps"), r.key_path("grad_steps"));
    g.only({"tail", "stride", "high", "base"});
    g.read("tail", m.grad_steps.tail);
    g.read("stride", m.grad_steps.stride);
    g.read("high", m.grad_steps.high);
    g.read("base", m.grad_steps.base);
  }
  if (r.has("warm_start")) {
    int w = 0;
    r.read("warm_start", w);
    m.warm_start = w;
  }
  r.read("n_mc", m.n_mc);
  if (r.has("adam")) {
    const Reader a(r.at("adam"), r.key_path("adam"));
    a.only({"beta1", "beta2", "eps"});
    a.read("beta1", m.beta1);
    a.read("beta2", m.beta2);
    a.read("eps", m.eps);
  }
}

void read_pgdm(const Reader& r, PgdmSettings& p) {
  r.only({"weight", "scaling"});
  std::string weight;
  r.read("weight", weight);
  if (weight == "sqrt_alpha_pair") p.weight = mgps::PgdmWeight::SqrtAlphaPair;
  else if (weight == "sqrt_alpha") p.weight = mgps::PgdmWeight::SqrtAlpha;
  else if (!weight.empty()) Reader::fail(r.key_path("weight"), "expected sqrt_alpha_pair or sqrt_alpha");
  std::string scaling;
  r.read("scaling", scaling);
  if (scaling == "variance_scaled") p.scaling = mgps::PgdmScaling::VarianceScaled;
  else if (scaling == "precision") p.scaling = mgps::PgdmScaling::Precision;
  else if (!scaling.empty()) Reader::fail(r.key_path("scaling"), "expected variance_scaled or precision");
}

}  // namespace

BenchmarkConfig default_config(Experiment experiment) {
  BenchmarkConfig c;
  c.experiment = experiment;
  switch (experiment) {
    case Experiment::GmBench:
      break;
    case Experiment::GaussW2:
      c.d = 100;
      c.methods = {"mgps"};
      c.etas = eta_grid(21);
      break;
    case Experiment::AblateEta:
      c.d = 200;
      c.methods = {"mgps"};
      c.etas = {0.1, 0.25, 0.5, 0.6, 0.75, 0.9, 1.0};
      break;
    case Experiment::AblateGradSteps:
      c.methods = {"mgps"};
      c.mgps.eta = 0.75;
      break;
    case Experiment::Sample:
      c.methods = {"mgps"};
      c.samples = 1;
      c.replicates = 1;
      break;
  }
  return c;
}

BenchmarkConfig parse_config(const std::string& json_text, Experiment experiment, const Overrides& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  BenchmarkConfig c = default_config(experiment);
  const Reader r(j, "");
  r.only({"experiment", "d", "dy", "sigma_y", "n_steps", "schedule", "methods", "mgps", "dps", "pgdm", "samples",
          "reference_samples", "replicates", "slices", "sw_order", "sw_aggregation", "sw_cap", "seed", "workers",
          "etas", "grad_steps_values", "instances", "terminal_var", "record_timing"});
  if (r.has("experiment")) {
    std::string name;
    r.read("experiment", name);
    if (parse_experiment(name) != experiment)
      Reader::fail("experiment", "config is for '" + name + "' but '" + experiment_name(experiment) + "' was requested");
  }
  r.read("d", c.d);
  r.read("dy", c.dy);
  r.read("sigma_y", c.sigma_y);
  r.read("n_steps", c.n_steps);
  if (r.has("schedule")) {
    const Reader s(r.at("schedule"), "schedule");
    s.only({"T", "beta_min", "beta_max"});
    s.read("T", c.schedule.T);
    s.read("beta_min", c.schedule.beta_min);
    s.read("beta_max", c.schedule.beta_max);
  }
  r.read("methods", c.methods);
  if (r.has("mgps")) read_mgps(Reader(r.at("mgps"), "mgps"), c.mgps);
  if (r.has("dps")) {
    const Reader s(r.at("dps"), "dps");
    s.only({"zetas"});
    s.read("zetas", c.dps.zetas);
  }
  if (r.has("pgdm")) read_pgdm(Reader(r.at("pgdm"), "pgdm"), c.pgdm);

  if (overrides.quick) {
    c.replicates = 30;
    c.samples = 500;
    c.slices = 2000;
  }
  r.read("samples", c.samples);
  if (r.has("reference_samples")) {
    int n = 0;
    r.read("reference_samples", n);
    c.reference_samples = n;
  }
  r.read("replicates", c.replicates);
  r.read("slices", c.slices);
  r.read("sw_order", c.sw_order);
  if (r.has("sw_aggregation")) {
    std::string agg;
    r.read("sw_aggregation", agg);
    if (agg == "root_mean") c.sw_root_of_mean = true;
    else if (agg == "mean") c.sw_root_of_mean = false;
    else Reader::fail("sw_aggregation", "expected root_mean or mean");
  }
  r.read("sw_cap", c.sw_cap);
  r.read("seed", c.seed);
  r.read("workers", c.workers);
  r.read("etas", c.etas);
  r.read("grad_steps_values", c.grad_steps_values);
  r.read("instances", c.instances);
  r.read("terminal_var", c.terminal_var);
  r.read("record_timing", c.record_timing);

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.workers) c.workers = *overrides.workers;
  c.validate();
  return c;
}

BenchmarkConfig load_config(const std::string& path, Experiment experiment, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), experiment, overrides);
}

mgps::NoiseSchedule BenchmarkConfig::build_schedule() const {
  return mgps::build_schedule(schedule.T, schedule.beta_min, schedule.beta_max, n_steps);
}

mgps::MidpointPlan BenchmarkConfig::default_plan() const {
  if (mgps.ell) return mgps::MidpointPlan::from_sequence(*mgps.ell);
  return mgps::midpoint_plan(n_steps, mgps.eta.value_or(0.75));
}

mgps::MgpsConfig BenchmarkConfig::mgps_config(const mgps::MidpointPlan& plan) const {
  mgps::MgpsConfig cfg{plan, mgps.grad_steps, {}, std::nullopt, 1};
  cfg.grad_steps = mgps.grad_steps;
  cfg.adam = {mgps.lr, mgps.beta1, mgps.beta2, mgps.eps};
  cfg.warm_start = mgps.warm_start;
  cfg.n_mc = mgps.n_mc;
  return cfg;
}

void BenchmarkConfig::validate() const {
  using mgps::require;
  require(d >= 1, "d must be positive");
  require(dy >= 1, "dy must be positive");
  require(sigma_y > 0.0, "sigma_y must be positive");
  require(n_steps >= 1, "n_steps must be positive");
  require(replicates >= 1, "replicates must be at least 1");
  require(experiment == Experiment::Sample ? samples >= 1 : samples >= 2, "samples must be at least 2");
  require(!reference_samples || *reference_samples >= 2, "reference_samples must be at least 2");
  require(slices >= 1, "slices must be positive");
  require(sw_order >= 1, "sw_order must be at least 1");
  require(sw_cap > 0.0, "sw_cap must be positive");
  require(workers >= 1, "workers must be at least 1");
  require(!methods.empty(), "methods must be nonempty");
  for (const auto& m : methods) {
    require(m == "mgps" || m == "mgps-ws" || m == "mgps-half" || m == "dps" || m == "pgdm",
            "unknown method '" + m + "' (expected mgps, mgps-ws, mgps-half, dps or pgdm)");
  }
  require(!mgps.eta || (*mgps.eta >= 0.0 && *mgps.eta <= 1.0), "mgps.eta must lie in [0, 1]");
  require(mgps.lr > 0.0, "mgps.lr must be positive");
  require(mgps.n_mc >= 1, "mgps.n_mc must be at least 1");
  require(mgps.grad_steps.high >= 1 && mgps.grad_steps.base >= 1, "mgps.grad_steps counts must be at least 1");
  require(mgps.grad_steps.tail >= 0 && mgps.grad_steps.stride >= 0, "mgps.grad_steps tail/stride must be >= 0");
  require(!mgps.warm_start || (*mgps.warm_start >= 1 && *mgps.warm_start <= n_steps),
          "mgps.warm_start must lie in [1, n_steps]");
  if (mgps.ell) require(static_cast<int>(mgps.ell->size()) == n_steps, "mgps.ell must have n_steps entries");
  require(!dps.zetas.empty(), "dps.zetas must be nonempty");
  for (double z : dps.zetas) require(z >= 0.0, "dps.zetas must be nonnegative");
  for (double e : etas) require(e >= 0.0 && e <= 1.0, "etas must lie in [0, 1]");
  for (int m : grad_steps_values) require(m >= 1, "grad_steps_values must be at least 1");
  require(instances >= 1, "instances must be positive");
  require(terminal_var >= 0.0, "terminal_var must be nonnegative");
  if (experiment == Experiment::GaussW2 || experiment == Experiment::AblateEta)
    require(!etas.empty(), "etas must be nonempty");
  if (experiment == Experiment::AblateGradSteps) require(!grad_steps_values.empty(), "grad_steps_values must be nonempty");
  if (experiment == Experiment::GaussW2) require(d >= 10, "gauss-w2 needs d >= 10");
  // Validate the schedule eagerly so configuration errors surface before any work starts.
  (void)build_schedule();
}

}  // namespace mgbench
