#pragma once

#include "mgps/likelihood.hpp"
#include "mgps/priors.hpp"
#include "mgps/types.hpp"

namespace mgps {

/// Diagonal Gaussian N(mu, diag(exp(2 rho))).
struct VariationalParams {
  Vector mu;
  Vector rho;

  Vector stddev() const { return rho.array().exp(); }
  /// Reparameterized draw mu + exp(rho) * z.
  Vector draw(const Vector& z) const { return mu + stddev().cwiseProduct(z); }
};

/// Gradient with respect to (mu, rho).
struct GradSpec {
  Vector mu;
  Vector rho;

  GradSpec& operator+=(const GradSpec& other) {
    mu += other.mu;
    rho += other.rho;
    return *this;
  }
  GradSpec& operator*=(double s) {
    mu *= s;
    rho *= s;
    return *this;
  }
  bool all_finite() const { return mu.allFinite() && rho.allFinite(); }
};

struct AdamOptions {
  double lr = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam state over the concatenation (mu, rho).
struct AdamState {
  Vector first;
  Vector second;
  long step = 0;
  AdamOptions options;

  AdamState(Eigen::Index d, AdamOptions opts)
      : first(Vector::Zero(2 * d)), second(Vector::Zero(2 * d)), options(opts) {}
};

/// One Adam update applied in place.
void adam_step(AdamState& state, const GradSpec& grad, VariationalParams& params);

/// Functional form: returns the updated copies.
std::pair<AdamState, VariationalParams> adam_step(const AdamState& state, const GradSpec& grad,
                                                  const VariationalParams& params);

struct KlValue {
  double value;
  GradSpec grad;
};

/// KL(N(mu, diag(e^{2 rho})) || N(mean, var I)) and its gradient.
KlValue kl_iso(const VariationalParams& params, const Vector& mean, double var);

/// Single-sample reparameterized gradient of -log p(y | m_{0|ell}(mu + e^rho z)).
GradSpec guidance_grad(const VariationalParams& params, const Vector& z, Step ell, const Denoiser& denoiser,
                       const Likelihood& lik);

/// Gaussian DDPM transition the KL term is measured against.
struct TransitionTarget {
  Vector mean;
  double var;
};

/// guidance_grad + gradient of the KL to the DDPM transition.
GradSpec total_grad(const VariationalParams& params, const Vector& z, Step ell, const TransitionTarget& target,
                    const Denoiser& denoiser, const Likelihood& lik);

/// Gradient of the warm-start objective for lambda_{1|ell} given X_ell = x_ell:
///   -sum rho + (|x_ell - s mu|^2 + s^2 sum e^{2 rho}) / (2 (1 - s^2)) - log p(y|x1) - log q_1(x1),
/// with s = sqrt(alpha_ell / alpha_1) and x1 = mu + e^rho z.
GradSpec warmstart_grad(const VariationalParams& params, const Vector& z, Step ell, const Vector& x_ell,
                        const Denoiser& denoiser, const Likelihood& lik);

/// Value of the single-sample warm-start objective above (up to a constant).
double warmstart_objective(const VariationalParams& params, const Vector& z, Step ell, const Vector& x_ell,
                           const Denoiser& denoiser, const Likelihood& lik);

}  // namespace mgps
