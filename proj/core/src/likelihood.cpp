#include "mgps/likelihood.hpp"

#include <cmath>
#include <numbers>

namespace mgps {

namespace {

void validate(const Matrix& A, const Vector& y, double sigma_y) {
  require(sigma_y > 0.0, "sigma_y must be positive");
  require(A.rows() == y.size(), "A must have one row per observation");
  require(A.cols() >= 1, "A must have at least one column");
}

double gaussian_loglik(const Vector& resid, double sigma_y) {
  const double var = sigma_y * sigma_y;
  return -0.5 * resid.squaredNorm() / var -
         0.5 * static_cast<double>(resid.size()) * std::log(2.0 * std::numbers::pi * var);
}

}  // namespace

LinearGaussianLikelihood::LinearGaussianLikelihood(Matrix A, Vector y, double sigma_y)
    : A_(std::move(A)), y_(std::move(y)), sigma_y_(sigma_y) {
  validate(A_, y_, sigma_y_);
}

Vector LinearGaussianLikelihood::residual(const Vector& x) const {
  require(x.size() == A_.cols(), "state has wrong dimension");
  return y_ - A_ * x;
}

double LinearGaussianLikelihood::loglik(const Vector& x) const { return gaussian_loglik(residual(x), sigma_y_); }

Vector LinearGaussianLikelihood::grad_loglik(const Vector& x) const {
  return A_.transpose() * residual(x) / (sigma_y_ * sigma_y_);
}

MagnitudeLikelihood::MagnitudeLikelihood(Matrix A, Vector y, double sigma_y)
    : A_(std::move(A)), y_(std::move(y)), sigma_y_(sigma_y) {
  validate(A_, y_, sigma_y_);
}

Vector MagnitudeLikelihood::residual(const Vector& x) const {
  require(x.size() == A_.cols(), "state has wrong dimension");
  return y_ - (A_ * x).cwiseAbs();
}

double MagnitudeLikelihood::loglik(const Vector& x) const { return gaussian_loglik(residual(x), sigma_y_); }

Vector MagnitudeLikelihood::grad_loglik(const Vector& x) const {
  require(x.size() == A_.cols(), "state has wrong dimension");
  const Vector ax = A_ * x;
  const Vector sign = ax.unaryExpr([](double t) { return static_cast<double>((t > 0.0) - (t < 0.0)); });
  const Vector resid = y_ - ax.cwiseAbs();
  return A_.transpose() * sign.cwiseProduct(resid) / (sigma_y_ * sigma_y_);
}

}  // namespace mgps
