#include "mgps/variational.hpp"

#include <cmath>

namespace mgps {

void adam_step(AdamState& state, const GradSpec& grad, VariationalParams& params) {
  const Eigen::Index d = params.mu.size();
  require(grad.mu.size() == d && grad.rho.size() == d && params.rho.size() == d && state.first.size() == 2 * d,
          "Adam state, gradient and parameters disagree on dimension");
  const AdamOptions& o = state.options;
  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));

  auto update = [&](auto first, auto second, const Vector& g, Vector& p) {
    first = o.beta1 * first + (1.0 - o.beta1) * g;
    second = o.beta2 * second + (1.0 - o.beta2) * g.cwiseAbs2();
    p.array() -= o.lr * (first.array() / bc1) / ((second.array() / bc2).sqrt() + o.eps);
  };
  update(state.first.head(d), state.second.head(d), grad.mu, params.mu);
  update(state.first.tail(d), state.second.tail(d), grad.rho, params.rho);
}

std::pair<AdamState, VariationalParams> adam_step(const AdamState& state, const GradSpec& grad,
                                                  const VariationalParams& params) {
  AdamState next_state = state;
  VariationalParams next_params = params;
  adam_step(next_state, grad, next_params);
  return {std::move(next_state), std::move(next_params)};
}

KlValue kl_iso(const VariationalParams& params, const Vector& mean, double var) {
  require(var > 0.0, "KL target variance must be positive");
  require(mean.size() == params.mu.size(), "KL target mean has wrong dimension");
  const Eigen::ArrayXd var_q = (2.0 * params.rho.array()).exp();
  const Eigen::ArrayXd diff = params.mu.array() - mean.array();
  const double value =
      (-params.rho.array() + 0.5 * std::log(var) + (var_q + diff.square()) / (2.0 * var) - 0.5).sum();
  GradSpec grad{(diff / var).matrix(), (var_q / var - 1.0).matrix()};
  return {value, std::move(grad)};
}

GradSpec guidance_grad(const VariationalParams& params, const Vector& z, Step ell, const Denoiser& denoiser,
                       const Likelihood& lik) {
  require(z.size() == params.mu.size(), "noise vector has wrong dimension");
  const Vector scaled = params.stddev().cwiseProduct(z);
  const Vector x = params.mu + scaled;
  Vector denoised;
  const Vector h = denoiser.value_and_vjp(
      ell, x, [&lik](const Vector& m) { return lik.grad_loglik(m); }, denoised);
  if (!h.allFinite()) throw NumericError("guidance gradient is not finite");
  return {-h, -h.cwiseProduct(scaled)};
}

GradSpec total_grad(const VariationalParams& params, const Vector& z, Step ell, const TransitionTarget& target,
                    const Denoiser& denoiser, const Likelihood& lik) {
  GradSpec grad = guidance_grad(params, z, ell, denoiser, lik);
  grad += kl_iso(params, target.mean, target.var).grad;
  return grad;
}

namespace {

double transition_ratio(const Denoiser& denoiser, Step ell) {
  const NoiseSchedule& s = denoiser.schedule();
  require(ell > 1 && ell <= s.n(), "warm start needs 1 < ell <= n");
  return s.alpha(ell) / s.alpha(1);
}

}  // namespace

GradSpec warmstart_grad(const VariationalParams& params, const Vector& z, Step ell, const Vector& x_ell,
                        const Denoiser& denoiser, const Likelihood& lik) {
  require(z.size() == params.mu.size() && x_ell.size() == params.mu.size(), "warm start vectors disagree on dimension");
  const double ratio = transition_ratio(denoiser, ell);
  const double s = std::sqrt(ratio);
  const double denom = 1.0 - ratio;

  const Vector stddev = params.stddev();
  const Vector x1 = params.mu + stddev.cwiseProduct(z);
  const Vector g = lik.grad_loglik(x1) + denoiser.score(1, x1);
  if (!g.allFinite()) throw NumericError("warm-start gradient is not finite");

  GradSpec grad;
  grad.mu = -s * (x_ell - s * params.mu) / denom - g;
  grad.rho = (-1.0 + ratio * stddev.array().square() / denom).matrix() - g.cwiseProduct(stddev).cwiseProduct(z);
  return grad;
}

double warmstart_objective(const VariationalParams& params, const Vector& z, Step ell, const Vector& x_ell,
                           const Denoiser& denoiser, const Likelihood& lik) {
  const double ratio = transition_ratio(denoiser, ell);
  const double s = std::sqrt(ratio);
  const Vector x1 = params.draw(z);
  const double transition =
      -params.rho.sum() +
      ((x_ell - s * params.mu).squaredNorm() + ratio * (2.0 * params.rho.array()).exp().sum()) / (2.0 * (1.0 - ratio));
  return transition - lik.loglik(x1) - denoiser.log_marginal(1, x1);
}

}  // namespace mgps
