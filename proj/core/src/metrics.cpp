#include "mgps/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mgps {

namespace {

double pow_abs(double x, int order) {
  const double a = std::abs(x);
  return order == 2 ? a * a : std::pow(a, order);
}

void check_symmetric(const Matrix& S, const char* name) {
  require(S.rows() == S.cols(), std::string(name) + " must be square");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  require((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale, std::string(name) + " must be symmetric");
}

}  // namespace

double wasserstein_1d_pow(Vector a, Vector b, int order) {
  require(a.size() > 0 && b.size() > 0, "empirical measures must be nonempty");
  require(order >= 1, "Wasserstein order must be at least 1");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const Eigen::Index na = a.size();
  const Eigen::Index nb = b.size();
  if (na == nb) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) acc += pow_abs(a[i] - b[i], order);
    return acc / static_cast<double>(na);
  }
  // Walk the merged breakpoints of the two quantile functions.
  double acc = 0.0;
  double t = 0.0;
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  while (i < na && j < nb) {
    const double next_a = static_cast<double>(i + 1) / static_cast<double>(na);
    const double next_b = static_cast<double>(j + 1) / static_cast<double>(nb);
    const double next = std::min(next_a, next_b);
    acc += (next - t) * pow_abs(a[i] - b[j], order);
    t = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return acc;
}

Matrix random_directions(Eigen::Index d, int count, Rng& rng) {
  require(d >= 1 && count >= 1, "need d >= 1 and at least one direction");
  Matrix dirs(d, count);
  for (int c = 0; c < count; ++c) {
    Vector v = rng.normal_vector(d);
    double norm = v.norm();
    while (norm == 0.0) {
      v = rng.normal_vector(d);
      norm = v.norm();
    }
    dirs.col(c) = v / norm;
  }
  return dirs;
}

double sliced_wasserstein_dirs(const Matrix& X, const Matrix& Y, const Matrix& directions,
                               const SlicedOptions& options) {
  require(X.rows() > 0 && Y.rows() > 0, "sample sets must be nonempty");
  require(X.cols() == Y.cols() && directions.rows() == X.cols(), "sample sets and directions disagree on dimension");
  require(directions.cols() > 0, "need at least one slice");
  const Matrix px = X * directions;
  const Matrix py = Y * directions;
  double acc = 0.0;
  for (Eigen::Index s = 0; s < directions.cols(); ++s) {
    const double w = wasserstein_1d_pow(px.col(s), py.col(s), options.order);
    acc += options.root_of_mean ? w : std::pow(w, 1.0 / options.order);
  }
  const double mean = acc / static_cast<double>(directions.cols());
  return options.root_of_mean ? std::pow(mean, 1.0 / options.order) : mean;
}

double sliced_wasserstein(const Matrix& X, const Matrix& Y, Rng& rng, const SlicedOptions& options) {
  require(options.n_slices >= 1, "n_slices must be positive");
  require(X.rows() > 0 && Y.rows() > 0, "sample sets must be nonempty");
  require(X.cols() == Y.cols(), "sample sets disagree on dimension");
  require(X.allFinite() && Y.allFinite(), "sample sets must be finite");
  return sliced_wasserstein_dirs(X, Y, random_directions(X.cols(), options.n_slices, rng), options);
}

double sliced_wasserstein(const SampleSet& X, const SampleSet& Y, Rng& rng, const SlicedOptions& options) {
  return sliced_wasserstein(X.samples, Y.samples, rng, options);
}

Matrix psd_sqrt(const Matrix& S) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()));
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double gaussian_w2(const GaussianMoments& g1, const GaussianMoments& g2) {
  check_symmetric(g1.cov, "first covariance");
  check_symmetric(g2.cov, "second covariance");
  require(g1.mean.size() == g2.mean.size() && g1.cov.rows() == g1.mean.size() && g2.cov.rows() == g2.mean.size(),
          "Gaussian moments disagree on dimension");
  const Matrix r1 = psd_sqrt(g1.cov);
  const Matrix cross = psd_sqrt(r1 * g2.cov * r1);
  const double w2sq = (g1.mean - g2.mean).squaredNorm() + g1.cov.trace() + g2.cov.trace() - 2.0 * cross.trace();
  return std::sqrt(std::max(w2sq, 0.0));
}

}  // namespace mgps
