#include "mgps/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mgps {

GaussianOracle::GaussianOracle(const GaussianPrior& prior, const LinearGaussianLikelihood& lik, NoiseSchedule schedule)
    : schedule_(std::move(schedule)),
      U_(prior.eigenvectors()),
      lambda_(prior.eigenvalues()),
      mean_rot_(prior.eigenvectors().transpose() * prior.mean()),
      A_rot_(lik.A() * prior.eigenvectors()),
      y_(lik.y()),
      noise_var_(lik.sigma_y() * lik.sigma_y()),
      posterior_{} {
  require(lik.dim() == prior.dim(), "likelihood and prior dimensions differ");
  const GaussianPrior post = gauss_exact_posterior(prior, lik.A(), lik.y(), lik.sigma_y());
  posterior_ = {post.mean(), post.cov()};
}

Vector GaussianOracle::gain(Step k) const {
  const double a = schedule_.alpha(k);
  const double v = schedule_.v(k);
  return (std::sqrt(a) * lambda_.array() / (a * lambda_.array() + v)).matrix();
}

Vector GaussianOracle::shrink(Step k) const {
  const double a = schedule_.alpha(k);
  const double v = schedule_.v(k);
  return (v / (a * lambda_.array() + v)).matrix();
}

GaussianOracle::Rotated GaussianOracle::rotated_transition(Step k, Step ell) const {
  const int n = schedule_.n();
  if (k < 1 || k >= n) throw IndexError("surrogate transition needs 1 <= k < n");
  if (ell < 1 || ell > k) throw IndexError("surrogate transition needs 1 <= ell <= k");
  Rotated r;
  const BridgeParams to_mid = bridge_params(schedule_, 0, ell, k + 1);
  r.var = to_mid.var;
  r.H_diag = (to_mid.w_lo * gain(k + 1)).array() + to_mid.w_hi;
  r.h = to_mid.w_lo * shrink(k + 1).cwiseProduct(mean_rot_);

  r.G = A_rot_ * gain(ell).asDiagonal();
  r.b = A_rot_ * shrink(ell).cwiseProduct(mean_rot_);

  // Gamma = (I / var + G^T G / noise_var)^{-1} via the Woodbury identity.
  Matrix inner = r.var * (r.G * r.G.transpose());
  inner.diagonal().array() += noise_var_;
  const Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success) throw NumericError("surrogate transition: observation covariance not SPD");
  r.Gamma = -(r.var * r.var) * (r.G.transpose() * llt.solve(r.G));
  r.Gamma.diagonal().array() += r.var;
  r.Gamma = symmetrize(r.Gamma);

  r.M_tilde = r.Gamma * (r.H_diag / r.var).asDiagonal();
  r.c_tilde = r.Gamma * (r.G.transpose() * (y_ - r.b) / noise_var_ + r.h / r.var);

  const BridgeParams to_k = bridge_params(schedule_, ell, k, k + 1);
  r.M = to_k.w_lo * r.M_tilde;
  r.M.diagonal().array() += to_k.w_hi;
  r.c = to_k.w_lo * r.c_tilde;
  r.S = (to_k.w_lo * to_k.w_lo) * r.Gamma;
  r.S.diagonal().array() += to_k.var;
  return r;
}

OracleIntermediates GaussianOracle::intermediates(Step k, Step ell) const {
  const Rotated r = rotated_transition(k, ell);
  const Matrix Ut = U_.transpose();
  OracleIntermediates out;
  out.A_hat = r.G * Ut;
  out.b = r.b;
  out.H = U_ * r.H_diag.asDiagonal() * Ut;
  out.h = U_ * r.h;
  out.var = r.var;
  out.Gamma = U_ * r.Gamma * Ut;
  out.M_tilde = U_ * r.M_tilde * Ut;
  out.c_tilde = U_ * r.c_tilde;
  const Eigen::LLT<Matrix> check(out.Gamma);
  if (check.info() != Eigen::Success) throw NumericError("surrogate transition: Gamma is not SPD");
  return out;
}

AffineTransition GaussianOracle::transition(Step k, Step ell) const {
  const Rotated r = rotated_transition(k, ell);
  const Matrix Ut = U_.transpose();
  Matrix S = U_ * r.S * Ut;
  S = symmetrize(S);
  return {U_ * r.M * Ut, U_ * r.c, std::move(S)};
}

SurrogateMoments GaussianOracle::run(const MidpointPlan& plan, const RecursionOptions& options) const {
  const int n = schedule_.n();
  require(plan.n() == n, "midpoint plan length does not match the schedule");
  require(options.terminal_var >= 0.0, "terminal variance must be nonnegative");
  const Eigen::Index d = dim();

  Vector mu = Vector::Zero(d);
  Matrix Sigma = Matrix::Identity(d, d);
  Matrix tmp(d, d);
  for (Step k = n - 1; k >= 1; --k) {
    const Rotated r = rotated_transition(k, plan(k));
    mu = r.M * mu + r.c;
    tmp.noalias() = r.M * Sigma;
    Sigma.noalias() = tmp * r.M.transpose();
    Sigma += r.S;
    Sigma = symmetrize(Sigma);
  }
  const Vector g1 = gain(1);
  mu = g1.cwiseProduct(mu) + shrink(1).cwiseProduct(mean_rot_);
  Sigma = g1.asDiagonal() * Sigma * g1.asDiagonal();
  Sigma.diagonal().array() += options.terminal_var;

  SurrogateMoments out{U_ * mu, U_ * Sigma * U_.transpose()};
  out.Sigma = symmetrize(out.Sigma);
  if (!out.mu.allFinite() || !out.Sigma.allFinite()) throw NumericError("moment recursion produced non-finite values");
  return out;
}

GaussianMoments GaussianOracle::posterior() const { return posterior_; }

AffineTransition surrogate_transition(Step k, const MidpointPlan& plan, const GaussianPrior& prior,
                                      const LinearGaussianLikelihood& lik, const NoiseSchedule& sched) {
  require(plan.n() == sched.n(), "midpoint plan length does not match the schedule");
  return GaussianOracle(prior, lik, sched).transition(k, plan(k));
}

SurrogateMoments run_moment_recursion(const MidpointPlan& plan, const GaussianPrior& prior,
                                      const LinearGaussianLikelihood& lik, const NoiseSchedule& sched,
                                      const RecursionOptions& options) {
  return GaussianOracle(prior, lik, sched).run(plan, options);
}

W2Landscape w2_landscape(const GaussianPrior& prior, const LinearGaussianLikelihood& lik,
                         const NoiseSchedule& sched, const std::vector<double>& etas,
                         const RecursionOptions& options) {
  require(!etas.empty(), "eta grid must be nonempty");
  const GaussianOracle oracle(prior, lik, sched);
  const GaussianMoments exact = oracle.posterior();
  W2Landscape out{{}, 0.0, std::numeric_limits<double>::infinity()};
  out.points.reserve(etas.size());
  for (double eta : etas) {
    require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
    const SurrogateMoments m = oracle.run(midpoint_plan(sched.n(), eta), options);
    const double w2 = gaussian_w2(exact, m.moments());
    out.points.push_back({eta, w2});
    if (w2 < out.w2_star) {
      out.w2_star = w2;
      out.eta_star = eta;
    }
  }
  return out;
}

}  // namespace mgps
