#pragma once

// Dense, coordinate-free construction of the Gaussian surrogate sampler, written
// from the model definitions with explicit inverses. Used to check the spectral
// implementation in the library.

#include "support/oracles.hpp"

#include <mgps/rng.hpp>

#include <cmath>
#include <vector>

namespace oracle {

/// Forward bridge X_l | X_j, X_k from the alpha grid.
struct Bridge {
  double w_lo, w_hi, var;
};

inline Bridge bridge(const std::vector<double>& alpha, int j, int l, int k) {
  const double aj = alpha[static_cast<std::size_t>(j)], al = alpha[static_cast<std::size_t>(l)],
               ak = alpha[static_cast<std::size_t>(k)];
  const double v_lj = 1.0 - al / aj, v_kl = 1.0 - ak / al, v_kj = 1.0 - ak / aj;
  if (v_kj == 0.0) return {1.0, 0.0, 0.0};
  return {std::sqrt(al / aj) * v_kl / v_kj, std::sqrt(ak / al) * v_lj / v_kj, v_lj * v_kl / v_kj};
}

struct Affine {
  Matrix M;
  Vector c;
  Matrix S;
};

class DenseSurrogate {
 public:
  DenseSurrogate(Vector m, Matrix Sigma, Matrix A, Vector y, double sigma_y, std::vector<double> alpha)
      : m_(std::move(m)), Sigma_(std::move(Sigma)), A_(std::move(A)), y_(std::move(y)), var_y_(sigma_y * sigma_y),
        alpha_(std::move(alpha)), Sinv_(Sigma_.inverse()) {}

  Eigen::Index dim() const { return m_.size(); }
  int n() const { return static_cast<int>(alpha_.size()) - 1; }

  /// E[X_0 | X_k = x] = J_k x + o_k.
  Matrix post_cov(int k) const {
    const double a = alpha_[static_cast<std::size_t>(k)];
    Matrix P = Sinv_;
    P.diagonal().array() += a / (1.0 - a);
    return P.inverse();
  }
  Matrix J(int k) const {
    const double a = alpha_[static_cast<std::size_t>(k)];
    return std::sqrt(a) / (1.0 - a) * post_cov(k);
  }
  Vector o(int k) const { return post_cov(k) * Sinv_ * m_; }

  /// Law of X_k given X_{k+1}: midpoint posterior at ell, then the bridge down to k.
  Affine transition(int k, int ell) const {
    const Bridge to_mid = bridge(alpha_, 0, ell, k + 1);
    const Matrix I = Matrix::Identity(dim(), dim());
    const Matrix H = to_mid.w_lo * J(k + 1) + to_mid.w_hi * I;
    const Vector h = to_mid.w_lo * o(k + 1);
    const Matrix Ahat = A_ * J(ell);
    const Vector b = A_ * o(ell);
    Matrix P = I / to_mid.var + Ahat.transpose() * Ahat / var_y_;
    Matrix Gamma = P.inverse();
    Gamma = mgps::symmetrize(Gamma);
    const Bridge to_k = bridge(alpha_, ell, k, k + 1);
    Affine t;
    t.M = to_k.w_lo * Gamma * H / to_mid.var + to_k.w_hi * I;
    t.c = to_k.w_lo * Gamma * (Ahat.transpose() * (y_ - b) / var_y_ + h / to_mid.var);
    t.S = to_k.w_lo * to_k.w_lo * Gamma + to_k.var * I;
    t.S = mgps::symmetrize(t.S);
    return t;
  }

  /// Moments of X_0 after running every transition from X_n ~ N(0, I) and the final map m_{0|1}.
  std::pair<Vector, Matrix> moments(const std::vector<int>& plan, double terminal_var = 0.0) const {
    Vector mu = Vector::Zero(dim());
    Matrix C = Matrix::Identity(dim(), dim());
    for (int k = n() - 1; k >= 1; --k) {
      const Affine t = transition(k, plan[static_cast<std::size_t>(k)]);
      mu = t.M * mu + t.c;
      C = t.M * C * t.M.transpose() + t.S;
    }
    const Matrix J1 = J(1);
    Matrix out = J1 * C * J1.transpose();
    out.diagonal().array() += terminal_var;
    return {J1 * mu + o(1), out};
  }

  /// Runs `chains` independent surrogate chains as columns of one matrix.
  Matrix simulate(const std::vector<int>& plan, int chains, mgps::Rng& rng) const {
    const Eigen::Index d = dim();
    Matrix X(d, chains);
    fill_normal(X, rng);
    Matrix Z(d, chains);
    for (int k = n() - 1; k >= 1; --k) {
      const Affine t = transition(k, plan[static_cast<std::size_t>(k)]);
      const Matrix L = Eigen::LLT<Matrix>(t.S).matrixL();
      fill_normal(Z, rng);
      Matrix next = t.M * X + L * Z;
      next.colwise() += t.c;
      X = std::move(next);
    }
    Matrix out = J(1) * X;
    out.colwise() += o(1);
    return out;
  }

 private:
  static void fill_normal(Matrix& Z, mgps::Rng& rng) {
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
      for (Eigen::Index i = 0; i < Z.rows(); ++i) Z(i, j) = rng.normal();
  }

  Vector m_;
  Matrix Sigma_;
  Matrix A_;
  Vector y_;
  double var_y_;
  std::vector<double> alpha_;
  Matrix Sinv_;
};

inline std::vector<double> alpha_grid(const mgps::NoiseSchedule& s) {
  std::vector<double> a(static_cast<std::size_t>(s.n()) + 1);
  for (int k = 0; k <= s.n(); ++k) a[static_cast<std::size_t>(k)] = s.alpha(k);
  return a;
}

inline std::vector<int> plan_indices(const mgps::MidpointPlan& p) {
  std::vector<int> out(static_cast<std::size_t>(p.n()) + 1, 0);
  for (int k = 1; k <= p.n(); ++k) out[static_cast<std::size_t>(k)] = p(k);
  return out;
}

}  // namespace oracle
