#pragma once

#include "mgps/rng.hpp"
#include "mgps/types.hpp"

#include <string>

namespace mgps {

/// N samples stored as rows, with an optional tag naming where they came from.
struct SampleSet {
  Matrix samples;
  std::string tag;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }
};

struct SlicedOptions {
  int n_slices = 10000;
  /// Wasserstein order p of each 1-D distance.
  int order = 2;
  /// true: (mean_theta W_p^p)^{1/p}; false: mean_theta W_p.
  bool root_of_mean = true;
};

/// p-Wasserstein distance (to the power p) between two 1-D empirical measures.
/// Equal sizes pair sorted samples; unequal sizes integrate the quantile functions.
double wasserstein_1d_pow(Vector a, Vector b, int order = 2);

/// Sliced Wasserstein between two sample sets over fresh uniform directions from `rng`.
double sliced_wasserstein(const Matrix& X, const Matrix& Y, Rng& rng, const SlicedOptions& options = {});
double sliced_wasserstein(const SampleSet& X, const SampleSet& Y, Rng& rng, const SlicedOptions& options = {});

/// Sliced Wasserstein over explicitly given unit directions (columns of `directions`).
double sliced_wasserstein_dirs(const Matrix& X, const Matrix& Y, const Matrix& directions,
                               const SlicedOptions& options = {});

/// Uniform unit directions in R^d as columns (d x count).
Matrix random_directions(Eigen::Index d, int count, Rng& rng);

struct GaussianMoments {
  Vector mean;
  Matrix cov;
};

/// Symmetric PSD square root via eigendecomposition with eigenvalues clamped at zero.
Matrix psd_sqrt(const Matrix& S);

/// Wasserstein-2 distance between two Gaussians (Bures formula).
double gaussian_w2(const GaussianMoments& g1, const GaussianMoments& g2);

}  // namespace mgps
