#include "mgps/samplers.hpp"

#include <chrono>
#include <cmath>

namespace mgps {

int GradStepRule::count(Step k, int n) const {
  if (tail > 0 && k >= n - tail) return high;
  if (stride > 0 && k % stride == 0) return high;
  return base;
}

void MgpsConfig::validate(int n) const {
  require(plan.n() == n, "midpoint plan length does not match the schedule");
  require(grad_steps.high >= 1 && grad_steps.base >= 1, "gradient step counts must be at least 1");
  require(grad_steps.tail >= 0 && grad_steps.stride >= 0, "gradient step rule tail/stride must be nonnegative");
  require(adam.lr > 0.0, "learning rate must be positive");
  require(n_mc >= 1, "n_mc must be at least 1");
  if (warm_start) require(*warm_start >= 1 && *warm_start <= n, "warm start threshold must lie in [1, n]");
}

namespace {

using Clock = std::chrono::steady_clock;

class ChainRecorder {
 public:
  explicit ChainRecorder(ChainOptions options) : options_(options), start_(Clock::now()) {}

  void record(Step k, const Vector& x) {
    if (!x.allFinite()) throw NumericError("non-finite state at step " + std::to_string(k));
    if (options_.record_trace) result_.trace.emplace_back(k, x);
  }

  ChainResult finish(Vector x0) {
    if (!x0.allFinite()) result_.diverged = true;
    result_.x0 = std::move(x0);
    return stamp();
  }

  ChainResult fail(Vector last) {
    result_.diverged = true;
    result_.x0 = std::move(last);
    return stamp();
  }

 private:
  ChainResult stamp() {
    result_.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    return std::move(result_);
  }

  ChainOptions options_;
  Clock::time_point start_;
  ChainResult result_;
};

/// Runs `steps` Adam iterations on a stochastic gradient oracle grad(params, z).
template <typename GradFn>
void optimize(VariationalParams& params, int steps, const AdamOptions& adam, int n_mc, Rng& rng, GradFn&& grad) {
  const Eigen::Index d = params.mu.size();
  AdamState state(d, adam);
  for (int j = 0; j < steps; ++j) {
    GradSpec g = grad(params, rng.normal_vector(d));
    for (int s = 1; s < n_mc; ++s) g += grad(params, rng.normal_vector(d));
    if (n_mc > 1) g *= 1.0 / n_mc;
    adam_step(state, g, params);
  }
  if (!params.mu.allFinite() || !params.rho.allFinite()) throw NumericError("variational parameters diverged");
}

/// Variational fit of lambda_{ell|k+1} started from the bridge q_{ell|0,k+1}(.|x0_init, x_next).
Vector midpoint_draw(Step k, Step ell, const Vector& x0_init, const Vector& x_next, int steps,
                     const Denoiser& denoiser, const Likelihood& lik, const MgpsConfig& cfg, Rng& rng) {
  const NoiseSchedule& s = denoiser.schedule();
  const BridgeParams to_mid = bridge_params(s, 0, ell, k + 1);
  const TransitionTarget target{bridge_mean(to_mid, denoiser.value(k + 1, x_next), x_next), to_mid.var};

  const Eigen::Index d = x_next.size();
  VariationalParams params{bridge_mean(to_mid, x0_init, x_next), Vector::Constant(d, 0.5 * std::log(to_mid.var))};
  optimize(params, steps, cfg.adam, cfg.n_mc, rng, [&](const VariationalParams& p, const Vector& z) {
    return total_grad(p, z, ell, target, denoiser, lik);
  });
  return params.draw(rng.normal_vector(d));
}

Vector ddpm_mean_step(const Denoiser& denoiser, Step k, const Vector& x_next, const BridgeParams& p) {
  return bridge_mean(p, denoiser.value(k + 1, x_next), x_next);
}

}  // namespace

ChainResult mgps_sample(const Denoiser& denoiser, const Likelihood& lik, const MgpsConfig& cfg, Rng& rng,
                        ChainOptions options) {
  const NoiseSchedule& s = denoiser.schedule();
  const int n = s.n();
  cfg.validate(n);
  require(lik.dim() == denoiser.dim(), "likelihood and prior dimensions differ");

  ChainRecorder rec(options);
  Vector x = rng.normal_vector(denoiser.dim());
  Vector x_mid = x;  // X_hat_{ell_{k+1}}
  try {
    rec.record(n, x);
    for (Step k = n - 1; k >= 1; --k) {
      const Step ell = cfg.plan(k);
      const Vector x0_init = denoiser.value(cfg.plan(k + 1), x_mid);
      x_mid = midpoint_draw(k, ell, x0_init, x, cfg.grad_steps.count(k, n), denoiser, lik, cfg, rng);
      x = bridge_sample(bridge_params(s, ell, k, k + 1), x_mid, x, rng);
      rec.record(k, x);
    }
    return rec.finish(denoiser.value(1, x));
  } catch (const NumericError&) {
    return rec.fail(std::move(x));
  }
}

std::pair<Vector, Vector> warm_start_step(Step k, Step ell, const Vector& x_ell_hat, const Vector& x_next, int steps,
                                          const Denoiser& denoiser, const Likelihood& lik, const AdamOptions& adam,
                                          int n_mc, Rng& rng) {
  const NoiseSchedule& s = denoiser.schedule();
  require(k >= 1 && k < s.n(), "warm start step must satisfy 1 <= k < n");
  require(ell >= 1 && ell <= k, "warm start midpoint must satisfy 1 <= ell <= k");
  require(steps >= 0 && n_mc >= 1, "warm start needs steps >= 0 and n_mc >= 1");

  Vector x1_hat;
  if (ell == 1) {
    x1_hat = x_ell_hat;
  } else {
    const BridgeParams init = bridge_params(s, 0, 1, ell);
    const Eigen::Index d = x_ell_hat.size();
    VariationalParams params{bridge_mean(init, denoiser.value(ell, x_ell_hat), x_ell_hat),
                             Vector::Constant(d, 0.5 * std::log(init.var))};
    optimize(params, steps, adam, n_mc, rng, [&](const VariationalParams& p, const Vector& z) {
      return warmstart_grad(p, z, ell, x_ell_hat, denoiser, lik);
    });
    x1_hat = params.draw(rng.normal_vector(d));
  }
  Vector x_k = bridge_sample(bridge_params(s, 1, k, k + 1), x1_hat, x_next, rng);
  return {std::move(x_k), std::move(x1_hat)};
}

ChainResult mgps_warmstart_sample(const Denoiser& denoiser, const Likelihood& lik, const MgpsConfig& cfg, Rng& rng,
                                  ChainOptions options) {
  const NoiseSchedule& s = denoiser.schedule();
  const int n = s.n();
  cfg.validate(n);
  require(lik.dim() == denoiser.dim(), "likelihood and prior dimensions differ");
  const int threshold = cfg.warm_start.value_or(std::max(1, (3 * n) / 4));

  ChainRecorder rec(options);
  Vector x = rng.normal_vector(denoiser.dim());
  try {
    rec.record(n, x);
    Vector x0_hat = denoiser.value(n, x);
    for (Step k = n - 1; k >= 1; --k) {
      const Step ell = cfg.plan(k);
      const int steps = cfg.grad_steps.count(k, n);
      const Vector x_mid = midpoint_draw(k, ell, x0_hat, x, steps, denoiser, lik, cfg, rng);
      if (k >= threshold) {
        auto [x_k, x1_hat] = warm_start_step(k, ell, x_mid, x, steps, denoiser, lik, cfg.adam, cfg.n_mc, rng);
        x = std::move(x_k);
        x0_hat = std::move(x1_hat);
      } else {
        x = bridge_sample(bridge_params(s, ell, k, k + 1), x_mid, x, rng);
        x0_hat = denoiser.value(ell, x_mid);
      }
      rec.record(k, x);
    }
    return rec.finish(denoiser.value(1, x));
  } catch (const NumericError&) {
    return rec.fail(std::move(x));
  }
}

ChainResult dps_sample(const Denoiser& denoiser, const Likelihood& lik, const DpsConfig& cfg, Rng& rng,
                       ChainOptions options) {
  require(cfg.zeta >= 0.0, "DPS guidance scale must be nonnegative");
  require(lik.dim() == denoiser.dim(), "likelihood and prior dimensions differ");
  const NoiseSchedule& s = denoiser.schedule();
  const int n = s.n();
  const double var_y = lik.sigma_y() * lik.sigma_y();

  ChainRecorder rec(options);
  Vector x = rng.normal_vector(denoiser.dim());
  try {
    rec.record(n, x);
    for (Step k = n - 1; k >= 1; --k) {
      Vector m;
      double resid_norm = 0.0;
      const Vector h = denoiser.value_and_vjp(
          k + 1, x,
          [&](const Vector& mv) {
            resid_norm = std::sqrt(lik.residual(mv).squaredNorm() + cfg.norm_eps);
            return lik.grad_loglik(mv);
          },
          m);
      const BridgeParams p = bridge_params(s, 0, k, k + 1);
      Vector next = bridge_sample(p, m, x, rng);
      if (cfg.zeta != 0.0) next += (cfg.zeta * var_y / resid_norm) * h;
      x = std::move(next);
      rec.record(k, x);
    }
    return rec.finish(denoiser.value(1, x));
  } catch (const NumericError&) {
    return rec.fail(std::move(x));
  }
}

namespace {

Vector pgdm_guidance_with(const Denoiser& denoiser, const LinearGaussianLikelihood& lik, const Matrix& gram, Step k,
                          const Vector& x, Vector& m) {
  const NoiseSchedule& s = denoiser.schedule();
  const double var_y = lik.sigma_y() * lik.sigma_y();
  Matrix cov = s.v(k) * gram;
  cov.diagonal().array() += var_y;
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw ParameterError("PGDM guidance covariance is singular");
  return denoiser.value_and_vjp(
      k, x, [&](const Vector& mv) -> Vector { return lik.A().transpose() * llt.solve(lik.y() - lik.A() * mv); }, m);
}

}  // namespace

Vector pgdm_guidance(const Denoiser& denoiser, const LinearGaussianLikelihood& lik, Step k, const Vector& x) {
  Vector m;
  return pgdm_guidance_with(denoiser, lik, lik.A() * lik.A().transpose(), k, x, m);
}

ChainResult pgdm_sample(const Denoiser& denoiser, const LinearGaussianLikelihood& lik, const PgdmConfig& cfg,
                        Rng& rng, ChainOptions options) {
  require(lik.dim() == denoiser.dim(), "likelihood and prior dimensions differ");
  const NoiseSchedule& s = denoiser.schedule();
  const int n = s.n();
  const Matrix gram = lik.A() * lik.A().transpose();

  ChainRecorder rec(options);
  Vector x = rng.normal_vector(denoiser.dim());
  try {
    rec.record(n, x);
    for (Step k = n - 1; k >= 1; --k) {
      Vector m;
      const Vector g = pgdm_guidance_with(denoiser, lik, gram, k + 1, x, m);
      double weight = cfg.weight == PgdmWeight::SqrtAlphaPair ? std::sqrt(s.alpha(k) * s.alpha(k + 1))
                                                                : std::sqrt(s.alpha(k + 1));
      if (cfg.scaling == PgdmScaling::VarianceScaled) weight *= s.v(k + 1);
      Vector next = bridge_sample(bridge_params(s, 0, k, k + 1), m, x, rng);
      next += weight * g;
      x = std::move(next);
      rec.record(k, x);
    }
    return rec.finish(denoiser.value(1, x));
  } catch (const NumericError&) {
    return rec.fail(std::move(x));
  }
}

ChainResult ddpm_sample(const Denoiser& denoiser, Rng& rng, ChainOptions options) {
  const NoiseSchedule& s = denoiser.schedule();
  const int n = s.n();
  ChainRecorder rec(options);
  Vector x = rng.normal_vector(denoiser.dim());
  try {
    rec.record(n, x);
    for (Step k = n - 1; k >= 1; --k) {
      const BridgeParams p = bridge_params(s, 0, k, k + 1);
      const Vector mean = ddpm_mean_step(denoiser, k, x, p);
      x = mean + std::sqrt(p.var) * rng.normal_vector(x.size());
      rec.record(k, x);
    }
    return rec.finish(denoiser.value(1, x));
  } catch (const NumericError&) {
    return rec.fail(std::move(x));
  }
}

}  // namespace mgps
