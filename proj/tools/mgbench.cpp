#include "mgbench/config.hpp"
#include "mgbench/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior-sampling benchmark runner"};
  std::string experiment_text;
  std::string config_path;
  std::string out_path;
  std::string problem_path;
  std::string plot_path;
  std::uint64_t seed = 0;
  int workers = 1;
  bool quick = false;

  app.add_option("experiment", experiment_text, "gm-bench | gauss-w2 | ablate-eta | ablate-gradsteps | sample")
      ->required();
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_path, "output CSV path")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads (overrides the config)");
  app.add_flag("--quick", quick, "30 replicates, 500 samples, 2000 slices unless set in the config");
  app.add_option("--problem", problem_path, "problem JSON for the sample experiment");
  app.add_option("--plot", plot_path, "also render an SVG of the summary to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const mgbench::Experiment experiment = mgbench::parse_experiment(experiment_text);
    mgbench::Overrides overrides;
    if (seed_opt->count() > 0) overrides.seed = seed;
    if (workers_opt->count() > 0) overrides.workers = workers;
    overrides.quick = quick;
    const mgbench::BenchmarkConfig cfg = config_path.empty()
                                             ? mgbench::parse_config("{}", experiment, overrides)
                                             : mgbench::load_config(config_path, experiment, overrides);

    if (experiment == mgbench::Experiment::Sample) {
      if (problem_path.empty()) throw mgps::ParameterError("--problem is required for the sample experiment");
      const mgbench::SingleResult res = mgbench::run_single(cfg, problem_path, out_path);
      std::cout << "diverged: " << res.diverged_count << " of " << cfg.samples << '\n';
      if (res.diverged_count > 0)
        std::cout << "note: diverged chains count as SW " << mgbench::format_number(cfg.sw_cap) << " in benchmarks\n";
      return 0;
    }

    mgbench::Summary summary;
    switch (experiment) {
      case mgbench::Experiment::GmBench: summary = mgbench::run_gm_benchmark(cfg, out_path); break;
      case mgbench::Experiment::GaussW2: summary = mgbench::run_gauss_w2(cfg, out_path); break;
      default: summary = mgbench::run_ablations(cfg, out_path); break;
    }
    mgbench::print_summary(std::cout, summary);
    if (!plot_path.empty()) mgbench::write_plot_svg(plot_path, summary, experiment_text);
    return 0;
  } catch (const mgps::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mgps::IndexError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mgbench::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const mgps::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
