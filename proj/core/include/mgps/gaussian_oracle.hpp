#pragma once

#include "mgps/likelihood.hpp"
#include "mgps/metrics.hpp"
#include "mgps/priors.hpp"
#include "mgps/problems.hpp"
#include "mgps/schedule.hpp"

#include <vector>

namespace mgps {

/// Closed-form pieces of the surrogate transition at (ell, k+1), in the original coordinates.
struct OracleIntermediates {
  Matrix A_hat;    // (sqrt(alpha_ell) / v_ell) A Sigma_{0|ell}
  Vector b;        // A Sigma_{0|ell} Sigma^{-1} m
  Matrix H;        // DDPM transition mean p_{ell|k+1}: H x + h
  Vector h;
  double var;      // v_{ell|0,k+1}
  Matrix Gamma;
  Matrix M_tilde;
  Vector c_tilde;
};

/// x_k | x_{k+1} ~ N(M x_{k+1} + c, S).
struct AffineTransition {
  Matrix M;
  Vector c;
  Matrix S;
};

struct SurrogateMoments {
  Vector mu;
  Matrix Sigma;

  GaussianMoments moments() const { return {mu, Sigma}; }
};

struct RecursionOptions {
  /// Variance of the final X_0 | X_1 step; 0 gives the deterministic map X_0 = m_{0|1}(X_1).
  double terminal_var = 0.0;
};

/// Exact surrogate-model computations for a Gaussian prior and linear-Gaussian likelihood.
/// Internally works in the eigenbasis of the prior covariance, where every denoiser is diagonal.
class GaussianOracle {
 public:
  GaussianOracle(const GaussianPrior& prior, const LinearGaussianLikelihood& lik, NoiseSchedule schedule);

  const NoiseSchedule& schedule() const { return schedule_; }
  Eigen::Index dim() const { return mean_rot_.size(); }

  OracleIntermediates intermediates(Step k, Step ell) const;
  AffineTransition transition(Step k, Step ell) const;
  SurrogateMoments run(const MidpointPlan& plan, const RecursionOptions& options = {}) const;

  /// Exact posterior pi = N(m_y, Sigma_y).
  GaussianMoments posterior() const;

 private:
  struct Rotated {
    Matrix Gamma;
    Matrix M;
    Vector c;
    Matrix S;
    Vector H_diag;
    Vector h;
    double var;
    Matrix G;  // rotated A_hat
    Vector b;
    Matrix M_tilde;
    Vector c_tilde;
  };
  Rotated rotated_transition(Step k, Step ell) const;
  Vector gain(Step k) const;
  Vector shrink(Step k) const;

  NoiseSchedule schedule_;
  Matrix U_;          // prior eigenvectors
  Vector lambda_;     // prior eigenvalues
  Vector mean_rot_;   // U^T m
  Matrix A_rot_;      // A U
  Vector y_;
  double noise_var_;
  GaussianMoments posterior_;
};

AffineTransition surrogate_transition(Step k, const MidpointPlan& plan, const GaussianPrior& prior,
                                      const LinearGaussianLikelihood& lik, const NoiseSchedule& sched);

SurrogateMoments run_moment_recursion(const MidpointPlan& plan, const GaussianPrior& prior,
                                      const LinearGaussianLikelihood& lik, const NoiseSchedule& sched,
                                      const RecursionOptions& options = {});

struct W2Point {
  double eta;
  double w2;
};

struct W2Landscape {
  std::vector<W2Point> points;
  double eta_star;
  double w2_star;
};

W2Landscape w2_landscape(const GaussianPrior& prior, const LinearGaussianLikelihood& lik,
                         const NoiseSchedule& sched, const std::vector<double>& etas,
                         const RecursionOptions& options = {});

}  // namespace mgps
