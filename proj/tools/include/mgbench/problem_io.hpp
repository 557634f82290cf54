#pragma once

#include <mgps/likelihood.hpp>
#include <mgps/priors.hpp>

#include <memory>
#include <string>
#include <variant>

namespace mgbench {

/// Problem file contents for the `sample` experiment.
///
///   {"prior": {"type": "gaussian", "mean": [...], "cov": [[...], ...]}
///          or {"type": "gmm", "weights": [...], "means": [[...], ...], "sigmas": [...]},
///    "likelihood": {"kind": "linear" | "magnitude", "A": [[...], ...] or flat row-major,
///                   "y": [...], "sigma_y": s}}
///
/// GMM means are listed one component per inner array.
struct Problem {
  std::variant<mgps::GaussianPrior, mgps::GaussianMixturePrior> prior;
  std::unique_ptr<mgps::Likelihood> lik;

  Eigen::Index dim() const;
};

/// Malformed input raises mgps::ParameterError naming the offending field (or JSON line/column).
Problem parse_problem(const std::string& json_text);
Problem load_problem(const std::string& path);

std::string problem_to_json(const mgps::GaussianPrior& prior, const mgps::Likelihood& lik);
std::string problem_to_json(const mgps::GaussianMixturePrior& prior, const mgps::Likelihood& lik);

}  // namespace mgbench
