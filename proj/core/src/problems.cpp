#include "mgps/problems.hpp"

#include <cmath>

namespace mgps {

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

Vector observe(const Matrix& A, const Vector& x, double sigma_y, Rng& rng) {
  return A * x + sigma_y * rng.normal_vector(A.rows());
}

}  // namespace

Matrix grid_mixture_means(Eigen::Index d) {
  require(d >= 1, "dimension must be positive");
  Matrix means(d, 25);
  int c = 0;
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j, ++c) {
      for (Eigen::Index r = 0; r < d; ++r) means(r, c) = 8.0 * (r % 2 == 0 ? i : j);
    }
  }
  return means;
}

GmProblem make_gm_problem(Eigen::Index d, Eigen::Index dy, double sigma_y, Rng& rng) {
  require(dy >= 1, "observation dimension must be positive");
  require(sigma_y > 0.0, "sigma_y must be positive");
  Vector weights(25);
  for (Eigen::Index i = 0; i < 25; ++i) weights[i] = rng.uniform();
  weights /= weights.sum();
  GaussianMixturePrior prior(weights, grid_mixture_means(d), Vector::Ones(25));

  Matrix A = gaussian_matrix(dy, d, rng);
  Vector x_star = sample_prior(prior, 1, rng).row(0).transpose();
  Vector y = observe(A, x_star, sigma_y, rng);
  return {std::move(prior), LinearGaussianLikelihood(std::move(A), std::move(y), sigma_y), std::move(x_star)};
}

GaussianProblem sample_random_instance(Eigen::Index d, Rng& rng) {
  require(d >= 10, "random Gaussian instances need d >= 10");
  const Vector mean = rng.normal_vector(d);
  Matrix G = gaussian_matrix(d, d, rng);
  G.colwise().normalize();
  const Eigen::JacobiSVD<Matrix> svd(G);
  const double lambda_bar_sq = svd.singularValues().squaredNorm() / static_cast<double>(d);
  Matrix cov = G * G.transpose();
  cov.diagonal().array() += lambda_bar_sq;
  GaussianPrior prior(mean, cov);

  const int dy_lo = static_cast<int>((d + 9) / 10);
  const int dy = rng.uniform_int(dy_lo, static_cast<int>(d));
  const double sigma_y = 0.1 + 0.4 * rng.uniform();
  Matrix A = gaussian_matrix(dy, d, rng);
  const Vector x_star = sample_prior(prior, 1, rng).row(0).transpose();
  Vector y = observe(A, x_star, sigma_y, rng);
  return {std::move(prior), LinearGaussianLikelihood(std::move(A), std::move(y), sigma_y), std::move(G),
          lambda_bar_sq};
}

}  // namespace mgps
