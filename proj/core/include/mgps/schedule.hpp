#pragma once

#include "mgps/rng.hpp"
#include "mgps/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mgps {

/// Coarse diffusion grid: alpha_k (cumulative signal fraction) at k = 0..n,
/// with v_k = 1 - alpha_k and the fine-grid times t_k they were read from.
class NoiseSchedule {
 public:
  /// Takes ownership of an explicit alpha grid; validates the invariants
  /// (alpha_0 = 1, strictly decreasing, alpha_n <= 1e-3).
  NoiseSchedule(std::vector<double> alphas, std::vector<int> t_grid);

  int n() const { return static_cast<int>(alphas_.size()) - 1; }
  double alpha(Step k) const { return alphas_.at(static_cast<std::size_t>(k)); }
  double v(Step k) const { return 1.0 - alpha(k); }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<int>& t_grid() const { return t_grid_; }

 private:
  std::vector<double> alphas_;
  std::vector<int> t_grid_;
};

/// Linear-beta DDPM schedule over `fine_steps` steps, subsampled evenly to `n` steps.
NoiseSchedule build_schedule(int fine_steps, double beta_min, double beta_max, int n);

/// Default grid used throughout: T = 1000, beta in [1e-4, 0.02].
NoiseSchedule default_schedule(int n);

struct ForwardCoeffs {
  double scale;
  double var;
};

/// q_{k|j}: X_k = scale * X_j + sqrt(var) * Z.
ForwardCoeffs forward_coeffs(const NoiseSchedule& s, Step j, Step k);

/// Gaussian bridge q_{ell|j,k}(x_ell | x_j, x_k) = N(w_lo x_j + w_hi x_k, var I).
struct BridgeParams {
  double w_lo;
  double w_hi;
  double var;
};

BridgeParams bridge_params(const NoiseSchedule& s, Step j, Step ell, Step k);

/// Draws w_lo * x_lo + w_hi * x_hi + sqrt(var) * Z.
Vector bridge_sample(const BridgeParams& p, const Vector& x_lo, const Vector& x_hi, Rng& rng);

/// Bridge mean without noise.
Vector bridge_mean(const BridgeParams& p, const Vector& x_lo, const Vector& x_hi);

/// Midpoint indices ell_k for k = 1..n, stored with ell(n) = n and ell(1) = 1.
class MidpointPlan {
 public:
  /// Explicit sequence (ell_1, ..., ell_n); validated against the plan invariants.
  static MidpointPlan from_sequence(std::vector<int> ell);

  int n() const { return static_cast<int>(ell_.size()); }
  /// ell_k for k in [1, n].
  int operator()(Step k) const { return ell_.at(static_cast<std::size_t>(k - 1)); }
  std::span<const int> sequence() const { return ell_; }
  std::optional<double> eta() const { return eta_; }

 private:
  friend MidpointPlan midpoint_plan(int n, double eta);
  explicit MidpointPlan(std::vector<int> ell, std::optional<double> eta = std::nullopt);

  std::vector<int> ell_;
  std::optional<double> eta_;
};

/// ell_k = clamp(floor(eta * k), 1, k) for k < n, ell_n = n.
MidpointPlan midpoint_plan(int n, double eta);

/// ell_k = floor(k / 2) for k >= floor(n / 2), ell_k = k below (image-task plan).
MidpointPlan piecewise_half_plan(int n);

}  // namespace mgps
