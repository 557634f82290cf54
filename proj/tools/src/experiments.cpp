#include "mgbench/experiments.hpp"

#include "mgbench/problem_io.hpp"

#include <mgps/gaussian_oracle.hpp>
#include <mgps/metrics.hpp>
#include <mgps/priors.hpp>
#include <mgps/problems.hpp>
#include <mgps/samplers.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace mgbench {

using mgps::ChainResult;
using mgps::Denoiser;
using mgps::LinearGaussianLikelihood;
using mgps::Matrix;
using mgps::NoiseSchedule;
using mgps::Rng;
using mgps::Vector;

namespace {

enum Stream : std::uint64_t { kProblem = 1, kReference = 2, kSlices = 3, kChain = 4, kBootstrap = 5 };

constexpr int kBootstrapResamples = 2000;

using ChainFn = std::function<ChainResult(const Denoiser&, const LinearGaussianLikelihood&, Rng&)>;

struct Variant {
  std::string method;
  std::string eta;
  ChainFn run;

  std::string key() const { return method + "|" + eta; }
};

std::string zeta_label(double z) { return "dps:zeta=" + format_number(z); }

std::vector<Variant> build_variants(const BenchmarkConfig& cfg) {
  std::vector<Variant> out;
  const auto mgps_variant = [&](std::string method, std::string eta, mgps::MgpsConfig mc, bool warm) {
    ChainFn fn = [mc, warm](const Denoiser& den, const LinearGaussianLikelihood& lik, Rng& rng) {
      return warm ? mgps::mgps_warmstart_sample(den, lik, mc, rng) : mgps::mgps_sample(den, lik, mc, rng);
    };
    out.push_back({std::move(method), std::move(eta), std::move(fn)});
  };
  const std::string plan_eta = cfg.mgps.ell ? "custom" : format_number(cfg.mgps.eta.value_or(0.75));

  switch (cfg.experiment) {
    case Experiment::AblateEta:
      for (double eta : cfg.etas)
        mgps_variant("mgps", format_number(eta), cfg.mgps_config(mgps::midpoint_plan(cfg.n_steps, eta)), false);
      return out;
    case Experiment::AblateGradSteps:
      for (int m : cfg.grad_steps_values) {
        mgps::MgpsConfig mc = cfg.mgps_config(cfg.default_plan());
        mc.grad_steps = mgps::GradStepRule::constant(m);
        mgps_variant("mgps:grad_steps=" + std::to_string(m), plan_eta, mc, false);
      }
      return out;
    default:
      break;
  }
  for (const std::string& m : cfg.methods) {
    if (m == "mgps") {
      mgps_variant("mgps", plan_eta, cfg.mgps_config(cfg.default_plan()), false);
    } else if (m == "mgps-ws") {
      mgps_variant("mgps-ws", plan_eta, cfg.mgps_config(cfg.default_plan()), true);
    } else if (m == "mgps-half") {
      mgps_variant("mgps-half", "half", cfg.mgps_config(mgps::piecewise_half_plan(cfg.n_steps)), false);
    } else if (m == "pgdm") {
      const mgps::PgdmConfig pc{cfg.pgdm.weight, cfg.pgdm.scaling};
      out.push_back({"pgdm", "na", [pc](const Denoiser& den, const LinearGaussianLikelihood& lik, Rng& rng) {
                       return mgps::pgdm_sample(den, lik, pc, rng);
                     }});
    } else if (m == "dps") {
      for (double z : cfg.dps.zetas) {
        const mgps::DpsConfig dc{z};
        out.push_back({zeta_label(z), "na", [dc](const Denoiser& den, const LinearGaussianLikelihood& lik, Rng& rng) {
                         return mgps::dps_sample(den, lik, dc, rng);
                       }});
      }
    }
  }
  return out;
}

std::vector<ResultRow> gm_replicate(const BenchmarkConfig& cfg, const NoiseSchedule& sched,
                                    const std::vector<Variant>& variants, int r) {
  const auto rep = static_cast<std::uint64_t>(r);
  Rng problem_rng = Rng::substream(cfg.seed, {kProblem, rep});
  const mgps::GmProblem prob = mgps::make_gm_problem(cfg.d, cfg.dy, cfg.sigma_y, problem_rng);
  const mgps::MixtureDenoiser denoiser(prob.prior, sched);
  const mgps::GaussianMixturePosterior post =
      mgps::gm_exact_posterior(prob.prior, prob.lik.A(), prob.lik.y(), prob.lik.sigma_y());
  Rng ref_rng = Rng::substream(cfg.seed, {kReference, rep});
  const Matrix reference = mgps::sample_gm_posterior(post, cfg.reference_samples.value_or(cfg.samples), ref_rng);
  Rng slice_rng = Rng::substream(cfg.seed, {kSlices, rep});
  const Matrix directions = mgps::random_directions(cfg.d, cfg.slices, slice_rng);
  const mgps::SlicedOptions sliced{cfg.slices, cfg.sw_order, cfg.sw_root_of_mean};

  std::vector<ResultRow> rows;
  for (const Variant& v : variants) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t key = label_hash(v.key());
    Matrix X(cfg.samples, cfg.d);
    bool diverged = false;
    for (int c = 0; c < cfg.samples && !diverged; ++c) {
      Rng rng = Rng::substream(cfg.seed, {kChain, rep, key, static_cast<std::uint64_t>(c)});
      const ChainResult res = v.run(denoiser, prob.lik, rng);
      if (res.diverged || !res.x0.allFinite()) diverged = true;
      else X.row(c) = res.x0.transpose();
    }
    double metric = cfg.sw_cap;
    if (!diverged) {
      const double sw = mgps::sliced_wasserstein_dirs(X, reference, directions, sliced);
      if (std::isfinite(sw) && sw < cfg.sw_cap) metric = sw;
      else diverged = true;
    }
    const double seconds =
        cfg.record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
    rows.push_back({r, v.method, cfg.d, cfg.dy, v.eta, cfg.n_steps, metric, diverged, seconds});
  }
  return rows;
}

std::vector<ResultRow> gauss_instance(const BenchmarkConfig& cfg, const NoiseSchedule& sched, int i) {
  const auto start = std::chrono::steady_clock::now();
  Rng problem_rng = Rng::substream(cfg.seed, {kProblem, static_cast<std::uint64_t>(i)});
  const mgps::GaussianProblem prob = mgps::sample_random_instance(cfg.d, problem_rng);
  const mgps::W2Landscape land =
      mgps::w2_landscape(prob.prior, prob.lik, sched, cfg.etas, mgps::RecursionOptions{cfg.terminal_var});
  const double seconds =
      cfg.record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
  const int dy = static_cast<int>(prob.lik.A().rows());
  std::vector<ResultRow> rows;
  for (const mgps::W2Point& p : land.points)
    rows.push_back({i, "mgps-oracle", cfg.d, dy, format_number(p.eta), cfg.n_steps, p.w2, false, 0.0});
  rows.push_back({i, "oracle-argmin", cfg.d, dy, format_number(land.eta_star), cfg.n_steps, land.w2_star, false, seconds});
  return rows;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

GroupSummary summarize_group(const std::string& method, const std::string& eta, const std::vector<double>& x,
                             int diverged, Rng& rng) {
  GroupSummary g;
  g.method = method;
  g.eta = eta;
  g.count = static_cast<int>(x.size());
  g.diverged = diverged;
  double sum = 0.0;
  for (double v : x) sum += v;
  g.mean = sum / g.count;
  double ss = 0.0;
  for (double v : x) ss += (v - g.mean) * (v - g.mean);
  g.sd = g.count > 1 ? std::sqrt(ss / (g.count - 1)) : 0.0;
  g.ci_half = 1.96 * g.sd / std::sqrt(static_cast<double>(g.count));
  std::vector<double> means(kBootstrapResamples);
  for (double& m : means) {
    double s = 0.0;
    for (int i = 0; i < g.count; ++i) s += x[static_cast<std::size_t>(rng.uniform_int(0, g.count - 1))];
    m = s / g.count;
  }
  g.boot_lo = quantile(means, 0.025);
  g.boot_hi = quantile(means, 0.975);
  g.q10 = quantile(x, 0.1);
  g.median = quantile(x, 0.5);
  g.q90 = quantile(x, 0.9);
  return g;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

std::uint64_t label_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string metric_name(Experiment e) { return e == Experiment::GaussW2 ? "w2" : "sw"; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  const int threads = std::max(1, std::min(workers, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count && !stop; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<ResultRow> collect_rows(const BenchmarkConfig& cfg) {
  cfg.validate();
  const NoiseSchedule sched = cfg.build_schedule();
  std::vector<std::vector<ResultRow>> parts;
  if (cfg.experiment == Experiment::GaussW2) {
    parts.resize(static_cast<std::size_t>(cfg.instances));
    parallel_for(cfg.instances, cfg.workers, [&](int i) { parts[static_cast<std::size_t>(i)] = gauss_instance(cfg, sched, i); });
  } else if (cfg.experiment == Experiment::Sample) {
    throw mgps::ParameterError("the sample experiment needs a problem file");
  } else {
    const std::vector<Variant> variants = build_variants(cfg);
    if (variants.empty()) throw mgps::ParameterError("no methods to run");
    parts.resize(static_cast<std::size_t>(cfg.replicates));
    parallel_for(cfg.replicates, cfg.workers,
                 [&](int r) { parts[static_cast<std::size_t>(r)] = gm_replicate(cfg, sched, variants, r); });
  }
  std::vector<ResultRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

const GroupSummary* Summary::find(const std::string& method, const std::string& eta) const {
  for (const GroupSummary& g : groups)
    if (g.method == method && (eta.empty() || g.eta == eta)) return &g;
  return nullptr;
}

Summary summarize(const std::vector<ResultRow>& rows, const BenchmarkConfig& cfg) {
  Summary s;
  s.metric = metric_name(cfg.experiment);
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, int>> groups;
  for (const ResultRow& r : rows) {
    const auto key = std::make_pair(r.method, r.eta);
    if (cfg.experiment == Experiment::GaussW2 && r.method == "oracle-argmin") continue;
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.first.push_back(r.metric);
    it->second.second += r.diverged ? 1 : 0;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    Rng rng = Rng::substream(cfg.seed, {kBootstrap, static_cast<std::uint64_t>(i)});
    const auto& [values, diverged] = groups.at(order[i]);
    s.groups.push_back(summarize_group(order[i].first, order[i].second, values, diverged, rng));
  }
  for (const GroupSummary& g : s.groups) {
    if (g.method.rfind("dps", 0) != 0) continue;
    if (!s.best_dps || g.mean < s.find(*s.best_dps)->mean) s.best_dps = g.method;
  }

  if (cfg.experiment == Experiment::GaussW2) {
    EtaStarStats st;
    std::map<int, double> w2_at_one;
    std::map<int, double> w2_star;
    for (const ResultRow& r : rows) {
      double eta = 0.0;
      if (r.method == "oracle-argmin" && parse_double(r.eta, eta)) {
        st.eta_star.push_back(eta);
        w2_star[r.replicate] = r.metric;
      } else if (r.method == "mgps-oracle" && parse_double(r.eta, eta) && eta == 1.0) {
        w2_at_one[r.replicate] = r.metric;
      }
    }
    st.median = quantile(st.eta_star, 0.5);
    if (w2_at_one.empty()) {
      st.frac_better_than_one = std::numeric_limits<double>::quiet_NaN();
    } else {
      int better = 0;
      for (const auto& [inst, w] : w2_star) better += w < w2_at_one.at(inst) ? 1 : 0;
      st.frac_better_than_one = static_cast<double>(better) / static_cast<double>(w2_star.size());
    }
    std::map<double, int> hist;
    for (double e : cfg.etas) hist[e] = 0;
    for (double e : st.eta_star) ++hist[e];
    st.histogram.assign(hist.begin(), hist.end());
    s.eta_star = std::move(st);
  }
  return s;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& metric) {
  out << "replicate,method,d,dy,eta,n_steps," << metric << ",diverged,seconds\n";
  for (const ResultRow& r : rows) {
    out << r.replicate << ',' << r.method << ',' << r.d << ',' << r.dy << ',' << r.eta << ',' << r.n_steps << ','
        << format_number(r.metric) << ',' << (r.diverged ? 1 : 0) << ',' << format_number(r.seconds) << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows, const std::string& metric) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, rows, metric);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

Summary run_rows(const BenchmarkConfig& cfg, const std::string& out_path) {
  const std::vector<ResultRow> rows = collect_rows(cfg);
  write_csv_file(out_path, rows, metric_name(cfg.experiment));
  return summarize(rows, cfg);
}

}  // namespace

Summary run_gm_benchmark(const BenchmarkConfig& cfg, const std::string& out_path) {
  mgps::require(cfg.experiment == Experiment::GmBench, "run_gm_benchmark needs a gm-bench config");
  return run_rows(cfg, out_path);
}

Summary run_gauss_w2(const BenchmarkConfig& cfg, const std::string& out_path) {
  mgps::require(cfg.experiment == Experiment::GaussW2, "run_gauss_w2 needs a gauss-w2 config");
  return run_rows(cfg, out_path);
}

Summary run_ablations(const BenchmarkConfig& cfg, const std::string& out_path) {
  mgps::require(cfg.experiment == Experiment::AblateEta || cfg.experiment == Experiment::AblateGradSteps,
                "run_ablations needs an ablate-eta or ablate-gradsteps config");
  return run_rows(cfg, out_path);
}

SingleResult run_single(const BenchmarkConfig& cfg, const std::string& problem_path, const std::string& out_path) {
  cfg.validate();
  const Problem problem = load_problem(problem_path);
  const NoiseSchedule sched = cfg.build_schedule();
  const Eigen::Index d = problem.dim();
  std::unique_ptr<Denoiser> denoiser = std::visit(
      [&](const auto& p) -> std::unique_ptr<Denoiser> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, mgps::GaussianPrior>) return std::make_unique<mgps::GaussianDenoiser>(p, sched);
        else return std::make_unique<mgps::MixtureDenoiser>(p, sched);
      },
      problem.prior);
  mgps::require(problem.lik->dim() == d, "likelihood and prior dimensions differ");

  const std::string& method = cfg.methods.front();
  const auto* linear = dynamic_cast<const LinearGaussianLikelihood*>(problem.lik.get());
  if (method == "pgdm" && linear == nullptr) throw mgps::ParameterError("pgdm needs a linear likelihood");

  SingleResult out;
  out.samples = Matrix::Constant(cfg.samples, d, std::numeric_limits<double>::quiet_NaN());
  out.diverged.assign(static_cast<std::size_t>(cfg.samples), false);
  const std::uint64_t key = label_hash(method);
  for (int c = 0; c < cfg.samples; ++c) {
    Rng rng = Rng::substream(cfg.seed, {kChain, 0, key, static_cast<std::uint64_t>(c)});
    ChainResult res;
    if (method == "mgps") {
      res = mgps::mgps_sample(*denoiser, *problem.lik, cfg.mgps_config(cfg.default_plan()), rng);
    } else if (method == "mgps-ws") {
      res = mgps::mgps_warmstart_sample(*denoiser, *problem.lik, cfg.mgps_config(cfg.default_plan()), rng);
    } else if (method == "mgps-half") {
      res = mgps::mgps_sample(*denoiser, *problem.lik, cfg.mgps_config(mgps::piecewise_half_plan(cfg.n_steps)), rng);
    } else if (method == "dps") {
      res = mgps::dps_sample(*denoiser, *problem.lik, mgps::DpsConfig{cfg.dps.zetas.front()}, rng);
    } else {
      res = mgps::pgdm_sample(*denoiser, *linear, mgps::PgdmConfig{cfg.pgdm.weight, cfg.pgdm.scaling}, rng);
    }
    if (res.diverged || !res.x0.allFinite()) {
      out.diverged[static_cast<std::size_t>(c)] = true;
      ++out.diverged_count;
    } else {
      out.samples.row(c) = res.x0.transpose();
    }
  }

  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + out_path + "' for writing");
  file << "sample,diverged";
  for (Eigen::Index j = 0; j < d; ++j) file << ",x" << j;
  file << '\n';
  for (int c = 0; c < cfg.samples; ++c) {
    file << c << ',' << (out.diverged[static_cast<std::size_t>(c)] ? 1 : 0);
    for (Eigen::Index j = 0; j < d; ++j) file << ',' << format_number(out.samples(c, j));
    file << '\n';
  }
  file.flush();
  if (!file) throw IoError("failed writing '" + out_path + "'");
  return out;
}

void print_summary(std::ostream& out, const Summary& summary) {
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-8s %5s %12s %10s %25s %9s\n", "method", "eta", "n", summary.metric.c_str(),
                "ci95", "bootstrap95", "diverged");
  out << line;
  for (const GroupSummary& g : summary.groups) {
    std::snprintf(line, sizeof line, "%-22s %-8s %5d %12.4f %10.4f   [%9.4f, %9.4f] %9d\n", g.method.c_str(),
                  g.eta.c_str(), g.count, g.mean, g.ci_half, g.boot_lo, g.boot_hi, g.diverged);
    out << line;
  }
  if (summary.best_dps) out << "best dps setting: " << *summary.best_dps << '\n';
  if (summary.eta_star) {
    const EtaStarStats& st = *summary.eta_star;
    out << "median eta*: " << format_number(st.median) << '\n';
    if (!std::isnan(st.frac_better_than_one))
      out << "share with W2(eta*) < W2(1): " << format_number(st.frac_better_than_one) << '\n';
    out << "eta* histogram:";
    for (const auto& [eta, count] : st.histogram) out << ' ' << format_number(eta) << ':' << count;
    out << '\n';
  }
}

void write_plot_svg(const std::string& path, const Summary& summary, const std::string& title) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 60;
  std::map<std::string, std::vector<std::pair<double, const GroupSummary*>>> series;
  bool numeric = true;
  for (const GroupSummary& g : summary.groups) {
    double x = 0.0;
    if (!parse_double(g.eta, x)) numeric = false;
    series[g.method].push_back({x, &g});
  }
  bool any_curve = false;
  for (const auto& [m, pts] : series) any_curve = any_curve || pts.size() > 1;
  numeric = numeric && any_curve;

  double ymax = 0.0;
  for (const GroupSummary& g : summary.groups) ymax = std::max(ymax, g.mean + g.ci_half);
  if (ymax <= 0.0) ymax = 1.0;
  double xmin = 0.0, xmax = 1.0;
  if (numeric) {
    xmin = std::numeric_limits<double>::infinity();
    xmax = -xmin;
    for (const auto& [m, pts] : series)
      for (const auto& p : pts) xmin = std::min(xmin, p.first), xmax = std::max(xmax, p.first);
    if (xmax <= xmin) xmax = xmin + 1.0;
  }
  const auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  const auto py = [&](double y) { return H - B - y / ymax * (H - T - B); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = ymax * i / 4.0;
    svg << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << format_number(std::round(y * 100) / 100) << "</text>\n";
  }
  svg << "<text x=\"16\" y=\"" << H / 2 << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << H / 2 << ")\">" << summary.metric << "</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  if (numeric) {
    int ci = 0;
    for (const auto& [m, pts_unsorted] : series) {
      auto pts = pts_unsorted;
      std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      const char* color = colors[ci++ % 6];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& p : pts) svg << px(p.first) << ',' << py(p.second->mean) << ' ';
      svg << "\"/>\n";
      for (const auto& p : pts) {
        svg << "<line x1=\"" << px(p.first) << "\" y1=\"" << py(p.second->mean - p.second->ci_half) << "\" x2=\""
            << px(p.first) << "\" y2=\"" << py(p.second->mean + p.second->ci_half) << "\" stroke=\"" << color << "\"/>\n";
        svg << "<text x=\"" << px(p.first) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"11\">" << format_number(p.first) << "</text>\n";
      }
      svg << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * ci << "\" text-anchor=\"end\" fill=\"" << color
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << m << "</text>\n";
    }
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\">eta</text>\n";
  } else {
    const double n = static_cast<double>(summary.groups.size());
    const double slot = (W - L - R) / std::max(1.0, n);
    for (std::size_t i = 0; i < summary.groups.size(); ++i) {
      const GroupSummary& g = summary.groups[i];
      const double x0 = L + slot * static_cast<double>(i) + slot * 0.15;
      svg << "<rect x=\"" << x0 << "\" y=\"" << py(g.mean) << "\" width=\"" << slot * 0.7 << "\" height=\""
          << H - B - py(g.mean) << "\" fill=\"" << colors[i % 6] << "\"/>\n";
      svg << "<line x1=\"" << x0 + slot * 0.35 << "\" y1=\"" << py(g.mean - g.ci_half) << "\" x2=\"" << x0 + slot * 0.35
          << "\" y2=\"" << py(g.mean + g.ci_half) << "\" stroke=\"black\"/>\n";
      svg << "<text x=\"" << x0 + slot * 0.35 << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" "
          << "font-family=\"sans-serif\" font-size=\"11\">" << g.method << "</text>\n";
    }
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << svg.str();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace mgbench
