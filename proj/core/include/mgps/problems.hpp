#pragma once

#include "mgps/likelihood.hpp"
#include "mgps/priors.hpp"
#include "mgps/rng.hpp"

namespace mgps {

/// Mixture benchmark instance: 25 unit-variance components on the grid
/// (8i, 8j, 8i, 8j, ...) for (i, j) in [-2, 2]^2, uniform-then-normalized weights,
/// A with i.i.d. N(0, 1) entries, y = A x* + sigma_y * noise with x* drawn from the prior.
struct GmProblem {
  GaussianMixturePrior prior;
  LinearGaussianLikelihood lik;
  Vector x_star;
};

/// Component means of the grid mixture as columns (d x 25).
Matrix grid_mixture_means(Eigen::Index d);

GmProblem make_gm_problem(Eigen::Index d, Eigen::Index dy, double sigma_y, Rng& rng);

/// Random Gaussian linear inverse problem: m ~ N(0, I), Sigma = lambda_bar^2 I + G G^T with
/// G column-normalized, d_y uniform on [ceil(d/10), d], sigma_y uniform on [0.1, 0.5],
/// A i.i.d. N(0, 1), y = A x* + sigma_y * noise with x* drawn from the prior.
struct GaussianProblem {
  GaussianPrior prior;
  LinearGaussianLikelihood lik;
  Matrix G;
  double lambda_bar_sq;
};

GaussianProblem sample_random_instance(Eigen::Index d, Rng& rng);

}  // namespace mgps
