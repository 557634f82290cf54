#pragma once

#include "mgps/rng.hpp"
#include "mgps/schedule.hpp"
#include "mgps/types.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace mgps {

/// N(m, Sigma) with Sigma SPD. The symmetric eigendecomposition of Sigma is
/// computed once at construction and reused by every derived quantity.
class GaussianPrior {
 public:
  GaussianPrior(Vector mean, Matrix cov);

  Eigen::Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  const Vector& eigenvalues() const { return eigvals_; }
  const Matrix& eigenvectors() const { return eigvecs_; }
  Matrix precision() const;
  /// Lower Cholesky factor of Sigma.
  const Matrix& cov_sqrt() const { return chol_; }

 private:
  Vector mean_;
  Matrix cov_;
  Vector eigvals_;
  Matrix eigvecs_;
  Matrix chol_;
};

/// sum_i w_i N(m_i, sigma_i^2 I). Means are stored column-wise (d x C).
class GaussianMixturePrior {
 public:
  GaussianMixturePrior(Vector weights, Matrix means, Vector sigmas);

  Eigen::Index dim() const { return means_.rows(); }
  Eigen::Index components() const { return means_.cols(); }
  const Vector& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const Vector& sigmas() const { return sigmas_; }

 private:
  Vector weights_;
  Matrix means_;
  Vector sigmas_;
};

/// Mixture posterior for a linear-Gaussian observation. Components with equal
/// prior sigma share a covariance; `cov_index(i)` maps component i to its entry.
struct GaussianMixturePosterior {
  Vector weights;                  // normalized
  Matrix means;                    // d x C
  std::vector<Matrix> covariances; // unique covariances
  std::vector<Matrix> cov_sqrts;   // lower Cholesky factors, parallel to covariances
  std::vector<int> cov_index;      // per component

  const Matrix& cov(Eigen::Index i) const { return covariances[static_cast<std::size_t>(cov_index[static_cast<std::size_t>(i)])]; }
  Vector mean() const { return means * weights; }
};

/// Posterior mean m_{0|k}(x) = E[X_0 | X_k = x] and its vector-Jacobian product,
/// plus the score and log-density of the noised marginal q_k.
///
/// Implementations are immutable and safe to share across threads.
class Denoiser {
 public:
  using Cotangent = std::function<Vector(const Vector&)>;

  virtual ~Denoiser() = default;

  virtual Eigen::Index dim() const = 0;
  virtual const NoiseSchedule& schedule() const = 0;

  virtual Vector value(Step k, const Vector& x) const = 0;
  /// u^T J where J = d m_{0|k} / dx evaluated at x.
  virtual Vector vjp(Step k, const Vector& x, const Vector& u) const = 0;
  virtual Vector score(Step k, const Vector& x) const = 0;
  virtual double log_marginal(Step k, const Vector& x) const = 0;

  /// Evaluates m = value(k, x), then returns vjp(k, x, cotangent(m)) and stores m.
  /// Mixture denoisers override this to share one responsibility computation.
  virtual Vector value_and_vjp(Step k, const Vector& x, const Cotangent& cotangent, Vector& value_out) const {
    value_out = value(k, x);
    return vjp(k, x, cotangent(value_out));
  }
};

/// Exact denoiser of a Gaussian prior; per-step spectral factors are cached.
class GaussianDenoiser final : public Denoiser {
 public:
  GaussianDenoiser(GaussianPrior prior, NoiseSchedule schedule);

  Eigen::Index dim() const override { return prior_.dim(); }
  const NoiseSchedule& schedule() const override { return schedule_; }
  const GaussianPrior& prior() const { return prior_; }

  Vector value(Step k, const Vector& x) const override;
  Vector vjp(Step k, const Vector& x, const Vector& u) const override;
  Vector score(Step k, const Vector& x) const override;
  double log_marginal(Step k, const Vector& x) const override;

  /// m_{0|k}(x) = linear_part(k) x + offset(k).
  Matrix linear_part(Step k) const;
  Vector offset(Step k) const;
  /// Sigma_{0|k} = ((alpha_k / v_k) I + Sigma^{-1})^{-1}.
  Matrix posterior_cov(Step k) const;

 private:
  GaussianPrior prior_;
  NoiseSchedule schedule_;
  Vector mean_rot_;     // U^T m
  Matrix gain_;         // d x (n+1): sqrt(a) lambda / (a lambda + v) per eigen-direction
  Matrix shrink_;       // d x (n+1): v / (a lambda + v)
  Matrix marg_var_;     // d x (n+1): a lambda + v
};

/// Exact denoiser of an isotropic Gaussian mixture, computed in log-space.
class MixtureDenoiser final : public Denoiser {
 public:
  MixtureDenoiser(GaussianMixturePrior prior, NoiseSchedule schedule);

  Eigen::Index dim() const override { return prior_.dim(); }
  const NoiseSchedule& schedule() const override { return schedule_; }
  const GaussianMixturePrior& prior() const { return prior_; }

  Vector value(Step k, const Vector& x) const override;
  Vector vjp(Step k, const Vector& x, const Vector& u) const override;
  Vector score(Step k, const Vector& x) const override;
  double log_marginal(Step k, const Vector& x) const override;

  Vector value_and_vjp(Step k, const Vector& x, const Cotangent& cotangent, Vector& value_out) const override;

  /// Component responsibilities at (k, x).
  Vector responsibilities(Step k, const Vector& x) const;
  /// Per-component conditional means E[X_0 | X_k = x, component i], as columns.
  Matrix component_means(Step k, const Vector& x) const;

 private:
  struct Local {
    Vector resp;        // responsibilities r_i
    Vector proj_x;      // m_i . x
    double log_norm;    // log q_k(x)
  };
  Local local(Step k, const Vector& x) const;
  Vector value_from(Step k, const Vector& x, const Local& loc) const;
  Vector score_from(Step k, const Vector& x, const Local& loc) const;
  Vector vjp_from(Step k, const Vector& x, const Local& loc, const Vector& u) const;

  GaussianMixturePrior prior_;
  NoiseSchedule schedule_;
  Vector log_weights_;
  Vector mean_sq_norms_;
  Matrix comp_var_;  // C x (n+1): alpha_k sigma_i^2 + v_k
};

// Free-function forms of the denoiser operations.

double gm_log_marginal(const GaussianMixturePrior& prior, const NoiseSchedule& sched, Step k, const Vector& x);
Vector gm_denoiser(const GaussianMixturePrior& prior, const NoiseSchedule& sched, Step k, const Vector& x);
Vector gm_denoiser_vjp(const GaussianMixturePrior& prior, const NoiseSchedule& sched, Step k, const Vector& x,
                       const Vector& u);
Vector gauss_denoiser(const GaussianPrior& prior, const NoiseSchedule& sched, Step k, const Vector& x);

/// Exact posterior of a mixture prior under y = A x + sigma_y * noise.
GaussianMixturePosterior gm_exact_posterior(const GaussianMixturePrior& prior, const Matrix& A, const Vector& y,
                                            double sigma_y);
/// Exact posterior of a Gaussian prior under y = A x + sigma_y * noise.
GaussianPrior gauss_exact_posterior(const GaussianPrior& prior, const Matrix& A, const Vector& y, double sigma_y);

/// Samples as rows (count x d).
Matrix sample_prior(const GaussianPrior& prior, int count, Rng& rng);
Matrix sample_prior(const GaussianMixturePrior& prior, int count, Rng& rng);
Matrix sample_gm_posterior(const GaussianMixturePosterior& post, int count, Rng& rng);

/// Draws a component index from normalized weights.
int sample_categorical(const Vector& weights, Rng& rng);

/// log N(x; mean, var I).
double log_normal_iso(const Vector& x, const Vector& mean, double var);

}  // namespace mgps
