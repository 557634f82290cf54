#include <doctest.h>

#include "support/oracles.hpp"
#include "support/surrogate.hpp"

#include <mgps/gaussian_oracle.hpp>

#include <cmath>

using namespace mgps;
using oracle::rel_err;

namespace {

struct Instance {
  GaussianPrior prior;
  LinearGaussianLikelihood lik;
};

Instance small_instance(Eigen::Index d, Rng& rng, double sigma_y = -1.0) {
  const Eigen::Index dy = rng.uniform_int(1, static_cast<int>(d));
  const double sy = sigma_y > 0.0 ? sigma_y : 0.1 + 0.4 * rng.uniform();
  return {GaussianPrior(rng.normal_vector(d), oracle::random_spd(d, rng)),
          LinearGaussianLikelihood(oracle::random_matrix(dy, d, rng), rng.normal_vector(dy), sy)};
}

oracle::DenseSurrogate dense(const Instance& in, const NoiseSchedule& s) {
  return {in.prior.mean(), in.prior.cov(), in.lik.A(), in.lik.y(), in.lik.sigma_y(), oracle::alpha_grid(s)};
}

double mat_rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-12); }

}  // namespace

TEST_CASE("surrogate transition matches the dense construction") {
  const NoiseSchedule s = default_schedule(100);
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = small_instance(rng.uniform_int(1, 6), rng);
    const GaussianOracle o(in.prior, in.lik, s);
    const oracle::DenseSurrogate ref = dense(in, s);
    const int k = rng.uniform_int(1, 99);
    const int ell = rng.uniform_int(1, k);
    const AffineTransition t = o.transition(k, ell);
    const oracle::Affine r = ref.transition(k, ell);
    CHECK(mat_rel(t.M, r.M) < 1e-8);
    CHECK(rel_err(t.c, r.c) < 1e-8);
    CHECK(mat_rel(t.S, r.S) < 1e-8);

    const OracleIntermediates im = o.intermediates(k, ell);
    CHECK(mat_rel(im.A_hat, in.lik.A() * ref.J(ell)) < 1e-8);
    CHECK(Eigen::LLT<Matrix>(im.Gamma).info() == Eigen::Success);
  }
}

TEST_CASE("midpoint at ell = k leaves only the midpoint posterior") {
  const NoiseSchedule s = default_schedule(50);
  Rng rng(2);
  const Instance in = small_instance(4, rng);
  const GaussianOracle o(in.prior, in.lik, s);
  for (int k : {1, 10, 49}) {
    const OracleIntermediates im = o.intermediates(k, k);
    const AffineTransition t = o.transition(k, k);
    CHECK(mat_rel(t.M, im.M_tilde) < 1e-12);
    CHECK(rel_err(t.c, im.c_tilde) < 1e-12);
    CHECK(mat_rel(t.S, im.Gamma) < 1e-12);
  }
  CHECK_THROWS_AS(o.transition(50, 10), IndexError);
  CHECK_THROWS_AS(o.transition(10, 11), IndexError);
  CHECK_THROWS_AS(o.transition(10, 0), IndexError);
}

TEST_CASE("moment recursion matches the dense recursion") {
  const NoiseSchedule s = default_schedule(80);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = small_instance(rng.uniform_int(1, 6), rng);
    const double eta = rng.uniform();
    const MidpointPlan plan = midpoint_plan(80, eta);
    for (double tv : {0.0, 0.01}) {
      const SurrogateMoments got = run_moment_recursion(plan, in.prior, in.lik, s, {tv});
      const auto [mu, C] = dense(in, s).moments(oracle::plan_indices(plan), tv);
      CHECK(rel_err(got.mu, mu) < 1e-8);
      CHECK(mat_rel(got.Sigma, C) < 1e-8);
    }
  }
}

TEST_CASE("moment recursion agrees with simulated surrogate chains") {
  const NoiseSchedule s = default_schedule(50);
  Rng rng(4);
  const Instance in = small_instance(3, rng);
  const MidpointPlan plan = midpoint_plan(50, 0.5);
  const SurrogateMoments sm = run_moment_recursion(plan, in.prior, in.lik, s);
  const Matrix X = dense(in, s).simulate(oracle::plan_indices(plan), 40000, rng).transpose();
  const Vector mean = oracle::row_mean(X);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - sm.mu[i]) < 4.0 * std::sqrt(sm.Sigma(i, i) / 40000));
  CHECK(mat_rel(oracle::row_cov(X), sm.Sigma) < 0.05);
}

TEST_CASE("scalar pipeline against a long surrogate simulation") {
  const NoiseSchedule s = default_schedule(40);
  const Instance in{GaussianPrior(Vector::Constant(1, 0.3), Matrix::Constant(1, 1, 2.0)),
                    LinearGaussianLikelihood(Matrix::Constant(1, 1, 1.2), Vector::Constant(1, 1.5), 0.4)};
  const MidpointPlan plan = midpoint_plan(40, 0.6);
  const SurrogateMoments sm = run_moment_recursion(plan, in.prior, in.lik, s);
  Rng rng(5);
  const Matrix X = dense(in, s).simulate(oracle::plan_indices(plan), 1000000, rng);
  const double mean = X.mean();
  const double var = (X.array() - mean).square().sum() / (X.size() - 1);
  CHECK(std::abs(mean / sm.mu[0] - 1.0) < 0.01);
  CHECK(std::abs(var / sm.Sigma(0, 0) - 1.0) < 0.03);
}

TEST_CASE("without an observation every plan gives the unguided chain") {
  const NoiseSchedule s = default_schedule(60);
  Rng rng(6);
  const GaussianPrior prior(rng.normal_vector(3), oracle::random_spd(3, rng));
  const LinearGaussianLikelihood lik(Matrix::Zero(1, 3), Vector::Zero(1), 1.0);
  const oracle::DenseSurrogate ref(prior.mean(), prior.cov(), Matrix::Zero(1, 3), Vector::Zero(1), 1.0,
                                   oracle::alpha_grid(s));
  // Unguided ancestral chain: X_k = w_lo m_{0|k+1}(X_{k+1}) + w_hi X_{k+1} + noise.
  Vector mu = Vector::Zero(3);
  Matrix C = Matrix::Identity(3, 3);
  const auto alpha = oracle::alpha_grid(s);
  for (int k = 59; k >= 1; --k) {
    const oracle::Bridge b = oracle::bridge(alpha, 0, k, k + 1);
    const Matrix M = b.w_lo * ref.J(k + 1) + b.w_hi * Matrix::Identity(3, 3);
    mu = M * mu + b.w_lo * ref.o(k + 1);
    C = M * C * M.transpose();
    C.diagonal().array() += b.var;
  }
  const Vector mu0 = ref.J(1) * mu + ref.o(1);
  const Matrix C0 = ref.J(1) * C * ref.J(1).transpose();
  for (double eta : {0.0, 0.3, 0.5, 1.0}) {
    const SurrogateMoments sm = run_moment_recursion(midpoint_plan(60, eta), prior, lik, s);
    CHECK(rel_err(sm.mu, mu0) < 1e-9);
    CHECK(mat_rel(sm.Sigma, C0) < 1e-9);
  }
}

TEST_CASE("recursion output is symmetric PSD") {
  const NoiseSchedule s = default_schedule(100);
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const GaussianProblem p = sample_random_instance(10, rng);
    const SurrogateMoments sm = run_moment_recursion(midpoint_plan(100, rng.uniform()), p.prior, p.lik, s);
    CHECK((sm.Sigma - sm.Sigma.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(sm.Sigma).eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("oracle posterior is the exact linear-Gaussian posterior") {
  Rng rng(8);
  const Instance in = small_instance(5, rng);
  const GaussianOracle o(in.prior, in.lik, default_schedule(20));
  const auto [mu, C] = oracle::dense_gauss_posterior(in.prior.mean(), in.prior.cov(), in.lik.A(), in.lik.y(),
                                                     in.lik.sigma_y());
  CHECK(rel_err(o.posterior().mean, mu) < 1e-10);
  CHECK(mat_rel(o.posterior().cov, C) < 1e-10);
}

TEST_CASE("W2 landscape") {
  const NoiseSchedule s = default_schedule(100);
  Rng rng(9);
  const std::vector<double> etas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

  SUBCASE("argmin and values") {
    const GaussianProblem p = sample_random_instance(12, rng);
    const W2Landscape l = w2_landscape(p.prior, p.lik, s, etas);
    REQUIRE(l.points.size() == etas.size());
    double best = l.points[0].w2;
    for (const W2Point& pt : l.points) best = std::min(best, pt.w2);
    CHECK(l.w2_star == best);
    const GaussianMoments exact{GaussianOracle(p.prior, p.lik, s).posterior()};
    const SurrogateMoments at = run_moment_recursion(midpoint_plan(100, l.eta_star), p.prior, p.lik, s);
    CHECK(gaussian_w2(exact, at.moments()) == doctest::Approx(l.w2_star).epsilon(1e-12));
    CHECK_THROWS_AS(w2_landscape(p.prior, p.lik, s, {1.5}), ParameterError);
    CHECK_THROWS_AS(w2_landscape(p.prior, p.lik, s, {}), ParameterError);
  }

  SUBCASE("flat when the observation carries no information") {
    Instance in = small_instance(4, rng, 1e6);
    const W2Landscape l = w2_landscape(in.prior, in.lik, s, etas);
    double lo = l.points[0].w2, hi = lo;
    for (const W2Point& pt : l.points) {
      lo = std::min(lo, pt.w2);
      hi = std::max(hi, pt.w2);
    }
    CHECK((hi - lo) / hi < 1e-6);
  }

  SUBCASE("invariant under a joint rotation of the problem") {
    const GaussianProblem p = sample_random_instance(10, rng);
    const Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(10, 10, rng));
    const Matrix Q = qr.householderQ() * Matrix::Identity(10, 10);
    const GaussianPrior rp(Q * p.prior.mean(), Q * p.prior.cov() * Q.transpose());
    const LinearGaussianLikelihood rl(p.lik.A() * Q.transpose(), p.lik.y(), p.lik.sigma_y());
    const W2Landscape a = w2_landscape(p.prior, p.lik, s, etas);
    const W2Landscape b = w2_landscape(rp, rl, s, etas);
    for (std::size_t i = 0; i < etas.size(); ++i) CHECK(b.points[i].w2 == doctest::Approx(a.points[i].w2).epsilon(1e-7));
  }
}

TEST_CASE("midpoint decomposition of the exact backward transition") {
  // For the diffused posterior, X_k | X_{k+1} equals the bridge from X_ell averaged over X_ell | X_{k+1}.
  const NoiseSchedule s = default_schedule(100);
  const auto alpha = oracle::alpha_grid(s);
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = rng.uniform_int(1, 4);
    const oracle::DiffusedGaussian post{rng.normal_vector(d), oracle::random_spd(d, rng), alpha};
    const int k = rng.uniform_int(1, 99);
    const int ell = rng.uniform_int(0, k);
    const Vector x_next = post.mean(k + 1) + rng.normal_vector(d);
    const Vector x_k = post.mean(k) + rng.normal_vector(d);

    const oracle::Conditional direct = post.given(k, k + 1);
    const double lhs = oracle::gauss_logpdf(x_k, direct.mean(x_next), direct.cov);

    const oracle::Conditional mid = post.given(ell, k + 1);
    const BridgeParams b = bridge_params(s, ell, k, k + 1);
    Matrix cov = b.w_lo * b.w_lo * mid.cov;
    cov.diagonal().array() += b.var;
    const double rhs = oracle::gauss_logpdf(x_k, b.w_lo * mid.mean(x_next) + b.w_hi * x_next, cov);
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}
