#include <doctest.h>

#include "support/oracles.hpp"

#include <mgps/variational.hpp>

#include <cmath>

using namespace mgps;
using oracle::rel_err;

namespace {

const NoiseSchedule& sched() {
  static const NoiseSchedule s = default_schedule(300);
  return s;
}

Vector concat(const GradSpec& g) {
  Vector v(2 * g.mu.size());
  v << g.mu, g.rho;
  return v;
}

VariationalParams split(const Vector& v) {
  const Eigen::Index d = v.size() / 2;
  return {v.head(d), v.tail(d)};
}

Vector concat(const VariationalParams& p) {
  Vector v(2 * p.mu.size());
  v << p.mu, p.rho;
  return v;
}

Vector fd_params(const std::function<double(const VariationalParams&)>& f, const VariationalParams& p, double h) {
  return oracle::fd_gradient([&](const Vector& v) { return f(split(v)); }, concat(p), h);
}

VariationalParams random_params(Eigen::Index d, Rng& rng) {
  Vector mu = rng.normal_vector(d);
  Vector rho = (0.3 * rng.normal_vector(d)).array() - 0.5;
  return {mu, rho};
}

}  // namespace

TEST_CASE("KL closed form") {
  const VariationalParams p{Vector::Constant(3, 0.2), Vector::Constant(3, 0.5 * std::log(0.7))};
  const KlValue same = kl_iso(p, p.mu, 0.7);
  CHECK(std::abs(same.value) < 1e-14);
  CHECK(concat(same.grad).norm() < 1e-14);

  const KlValue one = kl_iso({Vector::Ones(1), Vector::Zero(1)}, Vector::Zero(1), 1.0);
  CHECK(one.value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(kl_iso(p, p.mu, 0.0), ParameterError);
}

TEST_CASE("KL gradient and nonnegativity") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = rng.uniform_int(1, 6);
    const VariationalParams p = random_params(d, rng);
    const Vector mean = rng.normal_vector(d);
    const double var = 0.1 + rng.uniform();
    const KlValue kl = kl_iso(p, mean, var);
    CHECK(kl.value >= 0.0);
    const Vector fd = fd_params([&](const VariationalParams& q) { return kl_iso(q, mean, var).value; }, p, 1e-3);
    CHECK(rel_err(concat(kl.grad), fd) < 1e-7);
  }
}

TEST_CASE("Adam update rules") {
  const VariationalParams p{Vector::LinSpaced(3, -1, 1), Vector::Constant(3, -0.2)};
  AdamState state(3, AdamOptions{});
  const GradSpec zero{Vector::Zero(3), Vector::Zero(3)};
  const auto [s0, p0] = adam_step(state, zero, p);
  CHECK(p0.mu == p.mu);
  CHECK(p0.rho == p.rho);
  CHECK(s0.first.norm() == 0.0);
  CHECK(s0.second.norm() == 0.0);

  GradSpec g{Vector::Zero(3), Vector::Zero(3)};
  g.mu << 3.0, -0.5, 2e-3;
  g.rho << -7.0, 1.0, 0.01;
  const auto [s1, p1] = adam_step(state, g, p);
  const double lr = state.options.lr;
  CHECK(s1.step == 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs((p1.mu[i] - p.mu[i]) + lr * (g.mu[i] > 0 ? 1 : -1)) < lr * 1e-3);
    CHECK(std::abs((p1.rho[i] - p.rho[i]) + lr * (g.rho[i] > 0 ? 1 : -1)) < lr * 1e-3);
  }
  const auto [s2, p2] = adam_step(state, g, p);
  CHECK(p2.mu == p1.mu);
  CHECK(p2.rho == p1.rho);
  CHECK(s2.first == s1.first);
  CHECK_THROWS_AS(adam_step(state, GradSpec{Vector::Zero(2), Vector::Zero(2)}, p), ParameterError);
}

TEST_CASE("guidance gradient vanishes at a zero residual") {
  Rng rng(2);
  const GaussianMixturePrior prior = oracle::random_gm(3, 4, 2.0, rng);
  const MixtureDenoiser den(prior, sched());
  const VariationalParams p = random_params(3, rng);
  const Vector z = rng.normal_vector(3);
  const Matrix A = oracle::random_matrix(2, 3, rng);
  const LinearGaussianLikelihood lik(A, A * den.value(40, p.draw(z)), 0.1);
  CHECK(concat(guidance_grad(p, z, 40, den, lik)).norm() < 1e-9);
}

TEST_CASE("guidance gradient: Gaussian prior matches the affine-quadratic closed form") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = rng.uniform_int(1, 5), dy = rng.uniform_int(1, 3);
    const GaussianPrior prior(rng.normal_vector(d), oracle::random_spd(d, rng));
    const GaussianDenoiser den(prior, sched());
    const Matrix A = oracle::random_matrix(dy, d, rng);
    const Vector y = rng.normal_vector(dy);
    const double sy = 0.1 + rng.uniform();
    const LinearGaussianLikelihood lik(A, y, sy);
    const int ell = rng.uniform_int(1, 300);
    const VariationalParams p = random_params(d, rng);
    const Vector z = rng.normal_vector(d);

    // m_{0|ell}(x) = J x + c with J, c from dense inverses.
    const double a = sched().alpha(ell), v = sched().v(ell);
    Matrix prec = prior.cov().inverse();
    prec.diagonal().array() += a / v;
    const Matrix post = prec.inverse();
    const Matrix J = std::sqrt(a) / v * post;
    const Vector c = post * prior.cov().inverse() * prior.mean();
    const Vector x = p.mu + p.rho.array().exp().matrix().cwiseProduct(z);
    const Vector gmu = -J.transpose() * A.transpose() * (y - A * (J * x + c)) / (sy * sy);
    const Vector grho = gmu.cwiseProduct(p.rho.array().exp().matrix()).cwiseProduct(z);

    const GradSpec g = guidance_grad(p, z, ell, den, lik);
    CHECK(rel_err(g.mu, gmu) < 1e-8);
    CHECK(rel_err(g.rho, grho) < 1e-8);
  }
}

TEST_CASE("guidance gradient: mixture prior matches finite differences") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = rng.uniform_int(1, 5);
    const GaussianMixturePrior prior = oracle::random_gm(d, 4, 1.5, rng);
    const MixtureDenoiser den(prior, sched());
    const LinearGaussianLikelihood lik(oracle::random_matrix(2, d, rng), rng.normal_vector(2), 0.5);
    const int ell = rng.uniform_int(1, 300);
    const VariationalParams p = random_params(d, rng);
    const Vector z = rng.normal_vector(d);
    const auto f = [&](const VariationalParams& q) { return -lik.loglik(den.value(ell, q.draw(z))); };
    CHECK(rel_err(concat(guidance_grad(p, z, ell, den, lik)), fd_params(f, p, 1e-4)) < 1e-5);
  }
}

TEST_CASE("guidance gradient averages to the gradient of the marginalized objective") {
  Rng rng(5);
  const Eigen::Index d = 3;
  const GaussianPrior prior(rng.normal_vector(d), oracle::random_spd(d, rng));
  const GaussianDenoiser den(prior, sched());
  const Matrix A = oracle::random_matrix(2, d, rng);
  const Vector y = rng.normal_vector(2);
  const double sy = 0.7;
  const LinearGaussianLikelihood lik(A, y, sy);
  const int ell = 60;
  const VariationalParams p = random_params(d, rng);

  // E_z[-log p(y | J x + c)] = (|y - A(J mu + c)|^2 + sum_j e^{2 rho_j} |(A J)_j|^2) / (2 sy^2) + const.
  const Matrix AJ = A * den.linear_part(ell);
  const Vector c = den.offset(ell);
  const auto expected = [&](const VariationalParams& q) {
    const double fit = (y - A * c - AJ * q.mu).squaredNorm();
    const double spread = ((2.0 * q.rho.array()).exp() * AJ.colwise().squaredNorm().transpose().array()).sum();
    return (fit + spread) / (2 * sy * sy);
  };
  const Vector target = fd_params(expected, p, 1e-4);

  const int N = 10000;
  Matrix draws(N, 2 * d);
  for (int i = 0; i < N; ++i) draws.row(i) = concat(guidance_grad(p, rng.normal_vector(d), ell, den, lik)).transpose();
  const Vector mean = oracle::row_mean(draws);
  const Vector se = (oracle::row_cov(draws).diagonal() / N).cwiseSqrt();
  for (Eigen::Index i = 0; i < 2 * d; ++i) CHECK(std::abs(mean[i] - target[i]) < 4.0 * se[i] + 1e-9);
}

TEST_CASE("total gradient") {
  Rng rng(6);
  const Eigen::Index d = 3;
  const GaussianMixturePrior prior = oracle::random_gm(d, 3, 2.0, rng);
  const MixtureDenoiser den(prior, sched());
  const TransitionTarget target{rng.normal_vector(d), 0.3};
  const LinearGaussianLikelihood blind(Matrix::Zero(1, d), Vector::Zero(1), 1.0);
  const VariationalParams p = random_params(d, rng);
  const Vector z = rng.normal_vector(d);
  CHECK(rel_err(concat(total_grad(p, z, 30, target, den, blind)), concat(kl_iso(p, target.mean, target.var).grad)) < 1e-14);
  const VariationalParams opt{target.mean, Vector::Constant(d, 0.5 * std::log(target.var))};
  CHECK(concat(total_grad(opt, z, 30, target, den, blind)).norm() < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const LinearGaussianLikelihood lik(oracle::random_matrix(2, d, rng), rng.normal_vector(2), 0.4);
    const int ell = rng.uniform_int(1, 300);
    const VariationalParams q = random_params(d, rng);
    const Vector zz = rng.normal_vector(d);
    const auto f = [&](const VariationalParams& r) {
      return -lik.loglik(den.value(ell, r.draw(zz))) + kl_iso(r, target.mean, target.var).value;
    };
    CHECK(rel_err(concat(total_grad(q, zz, ell, target, den, lik)), fd_params(f, q, 1e-4)) < 1e-5);
  }
}

namespace {

/// Warm-start objective assembled from primitives.
double warm_objective(const VariationalParams& q, const Vector& z, int ell, const Vector& x_ell, const Denoiser& den,
                      const Likelihood& lik) {
  const double r = sched().alpha(ell) / sched().alpha(1);
  const Vector x1 = q.mu + q.rho.array().exp().matrix().cwiseProduct(z);
  const double transition = -q.rho.sum() + ((x_ell - std::sqrt(r) * q.mu).squaredNorm() +
                                            r * (2.0 * q.rho.array()).exp().sum()) / (2.0 * (1.0 - r));
  return transition - lik.loglik(x1) - den.log_marginal(1, x1);
}

}  // namespace

TEST_CASE("warm-start gradient matches finite differences of the assembled objective") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = rng.uniform_int(1, 4);
    const GaussianMixturePrior prior = oracle::random_gm(d, 3, 1.5, rng);
    const MixtureDenoiser den(prior, sched());
    const LinearGaussianLikelihood lik(oracle::random_matrix(2, d, rng), rng.normal_vector(2), 0.6);
    const int ell = rng.uniform_int(2, 300);
    const Vector x_ell = rng.normal_vector(d);
    const VariationalParams p = random_params(d, rng);
    const Vector z = rng.normal_vector(d);
    const auto f = [&](const VariationalParams& q) { return warm_objective(q, z, ell, x_ell, den, lik); };
    CHECK(rel_err(concat(warmstart_grad(p, z, ell, x_ell, den, lik)), fd_params(f, p, 1e-4)) < 1e-5);
    CHECK(warmstart_objective(p, z, ell, x_ell, den, lik) == doctest::Approx(f(p)).epsilon(1e-12));
  }
  const GaussianMixturePrior prior = oracle::random_gm(2, 2, 1.0, rng);
  const MixtureDenoiser den(prior, sched());
  const LinearGaussianLikelihood lik(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  const VariationalParams p = random_params(2, rng);
  CHECK_THROWS_AS(warmstart_grad(p, Vector::Zero(2), 1, Vector::Zero(2), den, lik), ParameterError);
}

TEST_CASE("warm-start gradient vanishes at the stationary point without an observation") {
  const double m = 0.8, var = 1.7;
  const GaussianDenoiser den(GaussianPrior(Vector::Constant(1, m), Matrix::Constant(1, 1, var)), sched());
  const LinearGaussianLikelihood blind(Matrix::Zero(1, 1), Vector::Zero(1), 1.0);
  const int ell = 90;
  const double r = sched().alpha(ell) / sched().alpha(1), s = std::sqrt(r);
  const double a1 = sched().alpha(1), marg = a1 * var + sched().v(1);
  const double x_ell = -0.4;
  // s (x_ell - s mu) / (1 - r) = (mu - sqrt(a1) m) / marg
  const double mu = (s * x_ell / (1 - r) + std::sqrt(a1) * m / marg) / (r / (1 - r) + 1 / marg);
  const VariationalParams p{Vector::Constant(1, mu), Vector::Constant(1, 0.5 * std::log((1 - r) / r))};
  CHECK(concat(warmstart_grad(p, Vector::Zero(1), ell, Vector::Constant(1, x_ell), den, blind)).norm() < 1e-10);
}

TEST_CASE("warm-start optimum matches the exact Gaussian conditional") {
  const double m = -0.3, var = 0.9, a = 1.2, y = 0.7, sy = 0.5;
  const GaussianDenoiser den(GaussianPrior(Vector::Constant(1, m), Matrix::Constant(1, 1, var)), sched());
  const LinearGaussianLikelihood lik(Matrix::Constant(1, 1, a), Vector::Constant(1, y), sy);
  const int ell = 20;
  const Vector x_ell = Vector::Constant(1, 0.25);
  const double r = sched().alpha(ell) / sched().alpha(1), s = std::sqrt(r);
  const double marg = sched().alpha(1) * var + sched().v(1);
  const double prec = r / (1 - r) + 1 / marg + a * a / (sy * sy);
  const double exact = (s * x_ell[0] / (1 - r) + std::sqrt(sched().alpha(1)) * m / marg + a * y / (sy * sy)) / prec;

  Rng rng(8);
  VariationalParams p{Vector::Zero(1), Vector::Zero(1)};
  AdamState state(1, AdamOptions{0.01});
  double avg = 0.0;
  const int burn = 3000, keep = 5000;
  for (int i = 0; i < burn + keep; ++i) {
    adam_step(state, warmstart_grad(p, rng.normal_vector(1), ell, x_ell, den, lik), p);
    if (i >= burn) avg += p.mu[0] / keep;
  }
  CHECK(std::abs(avg - exact) < 0.05 / std::sqrt(prec));
  CHECK(std::exp(2 * p.rho[0]) == doctest::Approx(1 / prec).epsilon(0.2));
}
