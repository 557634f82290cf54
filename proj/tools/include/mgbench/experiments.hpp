#pragma once

#include "mgbench/config.hpp"

#include <mgps/types.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgbench {

/// One CSV line. `eta` is a number, "na" for baselines, or a plan tag ("half", "custom").
struct ResultRow {
  int replicate = 0;
  std::string method;
  int d = 0;
  int dy = 0;
  std::string eta;
  int n_steps = 0;
  double metric = 0.0;
  bool diverged = false;
  double seconds = 0.0;
};

/// Column name of the metric: "w2" for gauss-w2, "sw" otherwise.
std::string metric_name(Experiment e);

struct GroupSummary {
  std::string method;
  std::string eta;
  int count = 0;
  int diverged = 0;
  double mean = 0.0;
  double sd = 0.0;
  /// Half-width of the normal-approximation 95% interval, 1.96 sd / sqrt(count).
  double ci_half = 0.0;
  double boot_lo = 0.0;
  double boot_hi = 0.0;
  double q10 = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

struct EtaStarStats {
  std::vector<double> eta_star;  // per instance
  double median = 0.0;
  /// Share of instances with W2(eta*) < W2(1); NaN when 1 is not on the grid.
  double frac_better_than_one = 0.0;
  std::vector<std::pair<double, int>> histogram;
};

struct Summary {
  std::string metric;
  std::vector<GroupSummary> groups;
  /// DPS group with the lowest mean, when DPS was run.
  std::optional<std::string> best_dps;
  std::optional<EtaStarStats> eta_star;

  const GroupSummary* find(const std::string& method, const std::string& eta = "") const;
};

/// Runs every replicate of `cfg` and returns rows sorted by (replicate, method order).
std::vector<ResultRow> collect_rows(const BenchmarkConfig& cfg);

Summary summarize(const std::vector<ResultRow>& rows, const BenchmarkConfig& cfg);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& metric);
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows, const std::string& metric);
std::string format_number(double x);

Summary run_gm_benchmark(const BenchmarkConfig& cfg, const std::string& out_path);
Summary run_gauss_w2(const BenchmarkConfig& cfg, const std::string& out_path);
Summary run_ablations(const BenchmarkConfig& cfg, const std::string& out_path);

struct SingleResult {
  mgps::Matrix samples;  // rows; diverged chains hold NaN
  std::vector<bool> diverged;
  int diverged_count = 0;
};

/// Runs the first configured method `cfg.samples` times on the problem in `problem_path`.
SingleResult run_single(const BenchmarkConfig& cfg, const std::string& problem_path, const std::string& out_path);

void print_summary(std::ostream& out, const Summary& summary);

/// Static SVG of the per-group means (line over eta when numeric, bars otherwise).
void write_plot_svg(const std::string& path, const Summary& summary, const std::string& title);

/// Calls fn(i) for i in [0, count) on `workers` threads; the first exception is rethrown.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

/// Stable 64-bit FNV-1a hash, used to key rng streams by method label.
std::uint64_t label_hash(const std::string& s);

}  // namespace mgbench
