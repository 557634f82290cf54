#include <doctest.h>

#include "support/oracles.hpp"

#include <mgps/problems.hpp>

#include <cmath>
#include <set>

using namespace mgps;

TEST_CASE("random Gaussian instances follow the construction") {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = rng.uniform_int(10, 40);
    const GaussianProblem p = sample_random_instance(d, rng);
    CHECK((p.G.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);

    const Eigen::JacobiSVD<Matrix> svd(p.G);
    CHECK(p.lambda_bar_sq == doctest::Approx(svd.singularValues().squaredNorm() / d).epsilon(1e-12));
    // Column-normalized G has squared Frobenius norm d, so the mean squared singular value is 1.
    CHECK(p.lambda_bar_sq == doctest::Approx(1.0).epsilon(1e-12));

    Matrix expect = p.G * p.G.transpose();
    expect.diagonal().array() += p.lambda_bar_sq;
    CHECK((p.prior.cov() - expect).norm() < 1e-12 * expect.norm());
    CHECK(p.prior.eigenvalues().minCoeff() >= p.lambda_bar_sq - 1e-10);

    CHECK(p.lik.A().cols() == d);
    CHECK(p.lik.sigma_y() >= 0.1);
    CHECK(p.lik.sigma_y() <= 0.5);
  }
  CHECK_THROWS_AS(sample_random_instance(9, rng), ParameterError);
}

TEST_CASE("observation dimension covers its whole range") {
  Rng rng(2);
  std::set<Eigen::Index> seen;
  for (int trial = 0; trial < 1000; ++trial) {
    const GaussianProblem p = sample_random_instance(10, rng);
    const Eigen::Index dy = p.lik.A().rows();
    REQUIRE(dy >= 1);
    REQUIRE(dy <= 10);
    seen.insert(dy);
  }
  CHECK(seen.size() == 10);

  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index dy = sample_random_instance(25, rng).lik.A().rows();
    REQUIRE(dy >= 3);
    REQUIRE(dy <= 25);
  }
}

TEST_CASE("grid mixture means") {
  const Matrix m = grid_mixture_means(5);
  REQUIRE(m.cols() == 25);
  std::set<std::pair<int, int>> pairs;
  for (Eigen::Index c = 0; c < 25; ++c) {
    const int i = static_cast<int>(m(0, c)), j = static_cast<int>(m(1, c));
    CHECK(i % 8 == 0);
    CHECK(std::abs(i) <= 16);
    CHECK(std::abs(j) <= 16);
    for (Eigen::Index r = 0; r < 5; ++r) CHECK(m(r, c) == (r % 2 == 0 ? i : j));
    pairs.insert({i, j});
  }
  CHECK(pairs.size() == 25);
}

TEST_CASE("mixture benchmark instances") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const GmProblem p = make_gm_problem(20, 1, 0.05, rng);
    CHECK(p.prior.components() == 25);
    CHECK(std::abs(p.prior.weights().sum() - 1.0) < 1e-12);
    CHECK(p.prior.weights().minCoeff() > 0.0);
    CHECK((p.prior.sigmas().array() == 1.0).all());
    CHECK(p.lik.A().rows() == 1);
    CHECK(p.lik.A().cols() == 20);
    // y is within a few noise widths of A x*.
    CHECK(std::abs((p.lik.y() - p.lik.A() * p.x_star)[0]) < 6.0 * 0.05);
  }
  CHECK_THROWS_AS(make_gm_problem(20, 0, 0.05, rng), ParameterError);
  CHECK_THROWS_AS(make_gm_problem(20, 1, 0.0, rng), ParameterError);
}

TEST_CASE("instances are reproducible from the seed") {
  Rng a(4), b(4);
  const GaussianProblem p = sample_random_instance(12, a), q = sample_random_instance(12, b);
  CHECK(p.prior.cov() == q.prior.cov());
  CHECK(p.lik.y() == q.lik.y());
  Rng c(5), e(5);
  CHECK(make_gm_problem(8, 2, 0.1, c).lik.y() == make_gm_problem(8, 2, 0.1, e).lik.y());
}
