#pragma once

#include "mgps/types.hpp"

#include <string_view>

namespace mgps {

/// Gaussian-noise observation model y = F(x) + sigma_y * noise.
class Likelihood {
 public:
  virtual ~Likelihood() = default;

  virtual std::string_view kind() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual const Matrix& A() const = 0;
  virtual const Vector& y() const = 0;
  virtual double sigma_y() const = 0;

  /// y - F(x).
  virtual Vector residual(const Vector& x) const = 0;
  virtual double loglik(const Vector& x) const = 0;
  virtual Vector grad_loglik(const Vector& x) const = 0;
};

/// p(y | x) = N(y; A x, sigma_y^2 I).
class LinearGaussianLikelihood final : public Likelihood {
 public:
  LinearGaussianLikelihood(Matrix A, Vector y, double sigma_y);

  std::string_view kind() const override { return "linear"; }
  Eigen::Index dim() const override { return A_.cols(); }
  const Matrix& A() const override { return A_; }
  const Vector& y() const override { return y_; }
  double sigma_y() const override { return sigma_y_; }

  Vector residual(const Vector& x) const override;
  double loglik(const Vector& x) const override;
  Vector grad_loglik(const Vector& x) const override;

 private:
  Matrix A_;
  Vector y_;
  double sigma_y_;
};

/// p(y | x) = N(y; |A x|, sigma_y^2 I) with |.| taken elementwise; sign(0) = 0 in the gradient.
class MagnitudeLikelihood final : public Likelihood {
 public:
  MagnitudeLikelihood(Matrix A, Vector y, double sigma_y);

  std::string_view kind() const override { return "magnitude"; }
  Eigen::Index dim() const override { return A_.cols(); }
  const Matrix& A() const override { return A_; }
  const Vector& y() const override { return y_; }
  double sigma_y() const override { return sigma_y_; }

  Vector residual(const Vector& x) const override;
  double loglik(const Vector& x) const override;
  Vector grad_loglik(const Vector& x) const override;

 private:
  Matrix A_;
  Vector y_;
  double sigma_y_;
};

inline double loglik(const Likelihood& lik, const Vector& x) { return lik.loglik(x); }
inline Vector grad_loglik(const Likelihood& lik, const Vector& x) { return lik.grad_loglik(x); }

}  // namespace mgps
