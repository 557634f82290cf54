#include "mgps/priors.hpp"

#include <cmath>
#include <numbers>

namespace mgps {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_sum_exp(const Vector& terms) {
  const double top = terms.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((terms.array() - top).exp().sum());
}

Matrix spd_inverse(const Matrix& precision, const char* what) {
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + ": matrix is not positive definite");
  return llt.solve(Matrix::Identity(precision.rows(), precision.cols()));
}

Matrix cholesky_lower(const Matrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + ": covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

double log_normal_iso(const Vector& x, const Vector& mean, double var) {
  const auto d = static_cast<double>(x.size());
  return -0.5 * (x - mean).squaredNorm() / var - 0.5 * d * (kLog2Pi + std::log(var));
}

// ---------------------------------------------------------------------------
// Priors

GaussianPrior::GaussianPrior(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  require(cov_.rows() == cov_.cols() && cov_.rows() == mean_.size(), "prior covariance must be d x d");
  require((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() <= 1e-10, "prior covariance must be symmetric");
  cov_ = symmetrize(cov_);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_);
  require(eig.info() == Eigen::Success, "eigendecomposition of prior covariance failed");
  eigvals_ = eig.eigenvalues();
  eigvecs_ = eig.eigenvectors();
  require(eigvals_.minCoeff() > 0.0, "prior covariance must be positive definite");
  chol_ = cholesky_lower(cov_, "GaussianPrior");
}

Matrix GaussianPrior::precision() const {
  return eigvecs_ * eigvals_.cwiseInverse().asDiagonal() * eigvecs_.transpose();
}

GaussianMixturePrior::GaussianMixturePrior(Vector weights, Matrix means, Vector sigmas)
    : weights_(std::move(weights)), means_(std::move(means)), sigmas_(std::move(sigmas)) {
  require(weights_.size() >= 1, "mixture needs at least one component");
  require(means_.cols() == weights_.size() && sigmas_.size() == weights_.size(),
          "mixture weights, means and sigmas must agree on the component count");
  require((weights_.array() >= 0.0).all(), "mixture weights must be nonnegative");
  require(std::abs(weights_.sum() - 1.0) < 1e-10, "mixture weights must sum to 1");
  require((sigmas_.array() > 0.0).all(), "mixture sigmas must be positive");
}

// ---------------------------------------------------------------------------
// Gaussian denoiser

GaussianDenoiser::GaussianDenoiser(GaussianPrior prior, NoiseSchedule schedule)
    : prior_(std::move(prior)), schedule_(std::move(schedule)) {
  const Eigen::Index d = prior_.dim();
  const int n = schedule_.n();
  mean_rot_ = prior_.eigenvectors().transpose() * prior_.mean();
  gain_.resize(d, n + 1);
  shrink_.resize(d, n + 1);
  marg_var_.resize(d, n + 1);
  for (int k = 0; k <= n; ++k) {
    const double a = schedule_.alpha(k);
    const double v = schedule_.v(k);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double lam = prior_.eigenvalues()[j];
      const double mv = a * lam + v;
      gain_(j, k) = std::sqrt(a) * lam / mv;
      shrink_(j, k) = v / mv;
      marg_var_(j, k) = mv;
    }
  }
}

Vector GaussianDenoiser::value(Step k, const Vector& x) const {
  const Matrix& U = prior_.eigenvectors();
  const Vector rot = gain_.col(k).cwiseProduct(U.transpose() * x) + shrink_.col(k).cwiseProduct(mean_rot_);
  return U * rot;
}

Vector GaussianDenoiser::vjp(Step k, const Vector& /*x*/, const Vector& u) const {
  const Matrix& U = prior_.eigenvectors();
  return U * gain_.col(k).cwiseProduct(U.transpose() * u);
}

Vector GaussianDenoiser::score(Step k, const Vector& x) const {
  const Matrix& U = prior_.eigenvectors();
  const Vector centered = U.transpose() * (x - std::sqrt(schedule_.alpha(k)) * prior_.mean());
  return -(U * centered.cwiseQuotient(marg_var_.col(k)));
}

double GaussianDenoiser::log_marginal(Step k, const Vector& x) const {
  const Matrix& U = prior_.eigenvectors();
  const Vector centered = U.transpose() * (x - std::sqrt(schedule_.alpha(k)) * prior_.mean());
  const auto var = marg_var_.col(k).array();
  return -0.5 * (centered.array().square() / var).sum() - 0.5 * (kLog2Pi + var.log()).sum();
}

Matrix GaussianDenoiser::linear_part(Step k) const {
  const Matrix& U = prior_.eigenvectors();
  return U * gain_.col(k).asDiagonal() * U.transpose();
}

Vector GaussianDenoiser::offset(Step k) const {
  return prior_.eigenvectors() * shrink_.col(k).cwiseProduct(mean_rot_);
}

Matrix GaussianDenoiser::posterior_cov(Step k) const {
  const Matrix& U = prior_.eigenvectors();
  const Vector diag = prior_.eigenvalues().cwiseProduct(shrink_.col(k));
  return U * diag.asDiagonal() * U.transpose();
}

// ---------------------------------------------------------------------------
// Mixture denoiser
//
// With s_i = alpha sigma_i^2 + v and g_i = -(x - sqrt(alpha) m_i) / s_i:
//   r_i      softmax of log w_i + log N(x; sqrt(alpha) m_i, s_i I)
//   mu_i(x)  = (sqrt(alpha) sigma_i^2 x + v m_i) / s_i
//   m(x)     = sum_i r_i mu_i(x)
//   u^T J    = (sum_i r_i c_i) u + sum_i r_i (u . mu_i) (g_i - g_bar),  c_i = sqrt(alpha) sigma_i^2 / s_i

MixtureDenoiser::MixtureDenoiser(GaussianMixturePrior prior, NoiseSchedule schedule)
    : prior_(std::move(prior)), schedule_(std::move(schedule)) {
  const Eigen::Index c = prior_.components();
  const int n = schedule_.n();
  log_weights_ = prior_.weights().array().log();
  mean_sq_norms_ = prior_.means().colwise().squaredNorm().transpose();
  comp_var_.resize(c, n + 1);
  for (int k = 0; k <= n; ++k) {
    const double a = schedule_.alpha(k);
    comp_var_.col(k) = a * prior_.sigmas().array().square() + schedule_.v(k);
  }
}

MixtureDenoiser::Local MixtureDenoiser::local(Step k, const Vector& x) const {
  const double a = schedule_.alpha(k);
  const double sa = std::sqrt(a);
  const auto d = static_cast<double>(x.size());
  Local loc;
  loc.proj_x.noalias() = prior_.means().transpose() * x;
  const double xx = x.squaredNorm();
  const auto s = comp_var_.col(k).array();
  Vector terms = log_weights_.array() -
                 (xx - 2.0 * sa * loc.proj_x.array() + a * mean_sq_norms_.array()).max(0.0) / (2.0 * s) -
                 0.5 * d * (kLog2Pi + s.log());
  loc.log_norm = log_sum_exp(terms);
  loc.resp = (terms.array() - loc.log_norm).exp();
  return loc;
}

Vector MixtureDenoiser::value_from(Step k, const Vector& x, const Local& loc) const {
  const double a = schedule_.alpha(k);
  const double v = schedule_.v(k);
  const auto s = comp_var_.col(k).array();
  const double x_coef = std::sqrt(a) * (loc.resp.array() * prior_.sigmas().array().square() / s).sum();
  const Vector mean_coef = v * (loc.resp.array() / s).matrix();
  Vector out = prior_.means() * mean_coef;
  out += x_coef * x;
  return out;
}

Vector MixtureDenoiser::score_from(Step k, const Vector& x, const Local& loc) const {
  const double sa = std::sqrt(schedule_.alpha(k));
  const auto s = comp_var_.col(k).array();
  const Vector r_over_s = (loc.resp.array() / s).matrix();
  Vector out = sa * (prior_.means() * r_over_s);
  out -= r_over_s.sum() * x;
  return out;
}

Vector MixtureDenoiser::vjp_from(Step k, const Vector& x, const Local& loc, const Vector& u) const {
  const double a = schedule_.alpha(k);
  const double sa = std::sqrt(a);
  const double v = schedule_.v(k);
  const auto s = comp_var_.col(k).array();
  const auto sig2 = prior_.sigmas().array().square();
  const auto r = loc.resp.array();

  const Vector proj_u = prior_.means().transpose() * u;
  const double ux = u.dot(x);
  // beta_i = r_i (u . mu_i(x))
  const Eigen::ArrayXd beta = r * (sa * sig2 * ux + v * proj_u.array()) / s;
  const double beta_sum = beta.sum();
  const double r_over_s_sum = (r / s).sum();
  const double beta_over_s_sum = (beta / s).sum();

  const Vector mean_coef = (sa * (beta / s - beta_sum * r / s)).matrix();
  Vector out = prior_.means() * mean_coef;
  out += (sa * (r * sig2 / s).sum()) * u;
  out -= (beta_over_s_sum - beta_sum * r_over_s_sum) * x;
  return out;
}

Vector MixtureDenoiser::value(Step k, const Vector& x) const { return value_from(k, x, local(k, x)); }

Vector MixtureDenoiser::vjp(Step k, const Vector& x, const Vector& u) const {
  return vjp_from(k, x, local(k, x), u);
}

Vector MixtureDenoiser::score(Step k, const Vector& x) const { return score_from(k, x, local(k, x)); }

double MixtureDenoiser::log_marginal(Step k, const Vector& x) const { return local(k, x).log_norm; }

Vector MixtureDenoiser::value_and_vjp(Step k, const Vector& x, const Cotangent& cotangent, Vector& value_out) const {
  const Local loc = local(k, x);
  value_out = value_from(k, x, loc);
  return vjp_from(k, x, loc, cotangent(value_out));
}

Vector MixtureDenoiser::responsibilities(Step k, const Vector& x) const { return local(k, x).resp; }

Matrix MixtureDenoiser::component_means(Step k, const Vector& x) const {
  const double sa = std::sqrt(schedule_.alpha(k));
  const double v = schedule_.v(k);
  Matrix out(dim(), prior_.components());
  for (Eigen::Index i = 0; i < prior_.components(); ++i) {
    const double s = comp_var_(i, k);
    const double sig2 = prior_.sigmas()[i] * prior_.sigmas()[i];
    out.col(i) = (sa * sig2 * x + v * prior_.means().col(i)) / s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Free-function forms

double gm_log_marginal(const GaussianMixturePrior& prior, const NoiseSchedule& sched, Step k, const Vector& x) {
  return MixtureDenoiser(prior, sched).log_marginal(k, x);
}

Vector gm_denoiser(const GaussianMixturePrior& prior, const NoiseSchedule& sched, Step k, const Vector& x) {
  return MixtureDenoiser(prior, sched).value(k, x);
}

Vector gm_denoiser_vjp(const GaussianMixturePrior& prior, const NoiseSchedule& sched, Step k, const Vector& x,
                       const Vector& u) {
  return MixtureDenoiser(prior, sched).vjp(k, x, u);
}

Vector gauss_denoiser(const GaussianPrior& prior, const NoiseSchedule& sched, Step k, const Vector& x) {
  return GaussianDenoiser(prior, sched).value(k, x);
}

// ---------------------------------------------------------------------------
// Exact posteriors

GaussianMixturePosterior gm_exact_posterior(const GaussianMixturePrior& prior, const Matrix& A, const Vector& y,
                                            double sigma_y) {
  require(sigma_y > 0.0, "sigma_y must be positive");
  require(A.cols() == prior.dim() && A.rows() == y.size(), "observation operator has incompatible shape");
  const Eigen::Index d = prior.dim();
  const Eigen::Index dy = A.rows();
  const Eigen::Index c = prior.components();
  const double noise_var = sigma_y * sigma_y;
  const Matrix AtA = A.transpose() * A;
  const Matrix AAt = A * A.transpose();
  const Vector Aty = A.transpose() * y;

  GaussianMixturePosterior post;
  post.means.resize(d, c);
  post.cov_index.resize(static_cast<std::size_t>(c));
  std::vector<double> unique_sigmas;
  std::vector<Eigen::LLT<Matrix>> evidence_factors;

  Vector log_w(c);
  for (Eigen::Index i = 0; i < c; ++i) {
    const double sig = prior.sigmas()[i];
    std::size_t u = 0;
    while (u < unique_sigmas.size() && unique_sigmas[u] != sig) ++u;
    if (u == unique_sigmas.size()) {
      unique_sigmas.push_back(sig);
      const Matrix precision = Matrix::Identity(d, d) / (sig * sig) + AtA / noise_var;
      Matrix cov = spd_inverse(precision, "gm_exact_posterior");
      cov = symmetrize(cov);
      post.cov_sqrts.push_back(cholesky_lower(cov, "gm_exact_posterior"));
      post.covariances.push_back(std::move(cov));
      Eigen::LLT<Matrix> ev(noise_var * Matrix::Identity(dy, dy) + sig * sig * AAt);
      if (ev.info() != Eigen::Success) throw NumericError("gm_exact_posterior: evidence covariance not SPD");
      evidence_factors.push_back(std::move(ev));
    }
    post.cov_index[static_cast<std::size_t>(i)] = static_cast<int>(u);
    const Matrix& cov = post.covariances[u];
    post.means.col(i) = cov * (Aty / noise_var + prior.means().col(i) / (sig * sig));

    const auto& ev = evidence_factors[u];
    const Vector resid = y - A * prior.means().col(i);
    const Matrix L = ev.matrixL();
    const Vector white = L.triangularView<Eigen::Lower>().solve(resid);
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    log_w[i] = std::log(prior.weights()[i]) - 0.5 * white.squaredNorm() - 0.5 * log_det -
               0.5 * static_cast<double>(dy) * kLog2Pi;
  }
  const double norm = log_sum_exp(log_w);
  if (!std::isfinite(norm)) throw NumericError("gm_exact_posterior: all posterior weights underflowed");
  post.weights = (log_w.array() - norm).exp();
  return post;
}

GaussianPrior gauss_exact_posterior(const GaussianPrior& prior, const Matrix& A, const Vector& y, double sigma_y) {
  require(sigma_y > 0.0, "sigma_y must be positive");
  require(A.cols() == prior.dim() && A.rows() == y.size(), "observation operator has incompatible shape");
  const double noise_var = sigma_y * sigma_y;
  const Matrix prec = prior.precision();
  Matrix cov = spd_inverse(prec + A.transpose() * A / noise_var, "gauss_exact_posterior");
  cov = symmetrize(cov);
  Vector mean = cov * (A.transpose() * y / noise_var + prec * prior.mean());
  return GaussianPrior(std::move(mean), std::move(cov));
}

// ---------------------------------------------------------------------------
// Sampling

int sample_categorical(const Vector& weights, Rng& rng) {
  const double u = rng.uniform() * weights.sum();
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

Matrix sample_prior(const GaussianPrior& prior, int count, Rng& rng) {
  require(count >= 1, "sample count must be >= 1");
  Matrix out(count, prior.dim());
  for (int s = 0; s < count; ++s) {
    out.row(s) = (prior.mean() + prior.cov_sqrt() * rng.normal_vector(prior.dim())).transpose();
  }
  return out;
}

Matrix sample_prior(const GaussianMixturePrior& prior, int count, Rng& rng) {
  require(count >= 1, "sample count must be >= 1");
  Matrix out(count, prior.dim());
  for (int s = 0; s < count; ++s) {
    const int i = sample_categorical(prior.weights(), rng);
    out.row(s) = (prior.means().col(i) + prior.sigmas()[i] * rng.normal_vector(prior.dim())).transpose();
  }
  return out;
}

Matrix sample_gm_posterior(const GaussianMixturePosterior& post, int count, Rng& rng) {
  require(count >= 1, "sample count must be >= 1");
  const Eigen::Index d = post.means.rows();
  Matrix out(count, d);
  for (int s = 0; s < count; ++s) {
    const int i = sample_categorical(post.weights, rng);
    const Matrix& L = post.cov_sqrts[static_cast<std::size_t>(post.cov_index[static_cast<std::size_t>(i)])];
    out.row(s) = (post.means.col(i) + L * rng.normal_vector(d)).transpose();
  }
  return out;
}

}  // namespace mgps
