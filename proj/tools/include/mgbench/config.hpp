#pragma once

#include <mgps/samplers.hpp>
#include <mgps/schedule.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgbench {

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class Experiment { GmBench, GaussW2, AblateEta, AblateGradSteps, Sample };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);

struct ScheduleConfig {
  int T = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
};

struct MgpsSettings {
  std::optional<double> eta = 0.75;
  /// Explicit (ell_1, ..., ell_n); overrides eta when present.
  std::optional<std::vector<int>> ell;
  double lr = 0.1;
  mgps::GradStepRule grad_steps{};
  std::optional<int> warm_start;
  int n_mc = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct DpsSettings {
  /// Guidance scales tried per setting; +inf is accepted and always diverges.
  std::vector<double> zetas{0.1, 0.3, 1.0};
};

struct PgdmSettings {
  mgps::PgdmWeight weight = mgps::PgdmWeight::SqrtAlphaPair;
  mgps::PgdmScaling scaling = mgps::PgdmScaling::VarianceScaled;
};

struct BenchmarkConfig {
  Experiment experiment = Experiment::GmBench;
  int d = 20;
  int dy = 1;
  double sigma_y = 0.05;
  int n_steps = 300;
  ScheduleConfig schedule{};
  std::vector<std::string> methods{"mgps", "pgdm", "dps"};
  MgpsSettings mgps{};
  DpsSettings dps{};
  PgdmSettings pgdm{};
  int samples = 1000;
  /// Exact-posterior reference draws per replicate; defaults to `samples`.
  std::optional<int> reference_samples;
  int replicates = 100;
  int slices = 10000;
  int sw_order = 2;
  bool sw_root_of_mean = true;
  /// SW assigned to a replicate whose chains diverged; also the cap on reported SW.
  double sw_cap = 10.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<double> etas{};
  std::vector<int> grad_steps_values{1, 2, 5, 10, 15, 20};
  int instances = 500;
  double terminal_var = 0.0;
  bool record_timing = false;

  mgps::NoiseSchedule build_schedule() const;
  mgps::MgpsConfig mgps_config(const mgps::MidpointPlan& plan) const;
  mgps::MidpointPlan default_plan() const;
  void validate() const;
};

/// Command-line overrides applied on top of the JSON file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool quick = false;
};

/// Parses a JSON config; unknown keys and malformed values raise mgps::ParameterError
/// with the offending key path. The `experiment` key, when present, must match `experiment`.
BenchmarkConfig parse_config(const std::string& json_text, Experiment experiment, const Overrides& overrides = {});
BenchmarkConfig load_config(const std::string& path, Experiment experiment, const Overrides& overrides = {});

/// Defaults for an experiment before any JSON is applied.
BenchmarkConfig default_config(Experiment experiment);

}  // namespace mgbench
