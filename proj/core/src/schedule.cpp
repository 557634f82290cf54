#include "mgps/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mgps {

NoiseSchedule::NoiseSchedule(std::vector<double> alphas, std::vector<int> t_grid)
    : alphas_(std::move(alphas)), t_grid_(std::move(t_grid)) {
  require(alphas_.size() >= 2, "schedule needs at least one step");
  require(t_grid_.size() == alphas_.size(), "t_grid and alphas must have equal length");
  require(alphas_.front() == 1.0, "alpha_0 must equal 1");
  for (std::size_t k = 1; k < alphas_.size(); ++k) {
    require(alphas_[k] > 0.0 && alphas_[k] < alphas_[k - 1], "alphas must be positive and strictly decreasing");
  }
  require(alphas_.back() <= 1e-3, "alpha_n must be <= 1e-3 (terminal state not close to N(0, I))");
}

NoiseSchedule build_schedule(int fine_steps, double beta_min, double beta_max, int n) {
  require(0.0 < beta_min && beta_min <= beta_max && beta_max < 1.0,
          "need 0 < beta_min <= beta_max < 1");
  require(n >= 1 && n <= fine_steps, "need 1 <= n <= T");

  // Fine grid: alpha_bar_t = prod_{s=1..t} (1 - beta_s), alpha_bar_0 = 1.
  std::vector<double> alpha_bar(static_cast<std::size_t>(fine_steps) + 1);
  alpha_bar[0] = 1.0;
  // Accumulate in log-space so long products stay accurate.
  double log_acc = 0.0;
  for (int s = 1; s <= fine_steps; ++s) {
    const double frac = fine_steps == 1 ? 0.0 : static_cast<double>(s - 1) / (fine_steps - 1);
    const double beta = beta_min + frac * (beta_max - beta_min);
    log_acc += std::log1p(-beta);
    alpha_bar[static_cast<std::size_t>(s)] = std::exp(log_acc);
  }

  std::vector<double> alphas(static_cast<std::size_t>(n) + 1);
  std::vector<int> t_grid(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const int t = static_cast<int>((static_cast<long long>(k) * fine_steps) / n);
    t_grid[static_cast<std::size_t>(k)] = t;
    alphas[static_cast<std::size_t>(k)] = alpha_bar[static_cast<std::size_t>(t)];
  }
  alphas[0] = 1.0;
  return NoiseSchedule(std::move(alphas), std::move(t_grid));
}

NoiseSchedule default_schedule(int n) { return build_schedule(1000, 1e-4, 0.02, n); }

namespace {

void check_index(const NoiseSchedule& s, Step k) {
  if (k < 0 || k > s.n()) {
    std::ostringstream msg;
    msg << "step " << k << " outside [0, " << s.n() << "]";
    throw IndexError(msg.str());
  }
}

}  // namespace

ForwardCoeffs forward_coeffs(const NoiseSchedule& s, Step j, Step k) {
  check_index(s, j);
  check_index(s, k);
  if (j > k) throw IndexError("forward_coeffs requires j <= k");
  if (j == k) return {1.0, 0.0};
  const double ratio = s.alpha(k) / s.alpha(j);
  return {std::sqrt(ratio), 1.0 - ratio};
}

BridgeParams bridge_params(const NoiseSchedule& s, Step j, Step ell, Step k) {
  check_index(s, j);
  check_index(s, ell);
  check_index(s, k);
  if (!(j <= ell && ell <= k && j < k)) throw IndexError("bridge_params requires j <= ell <= k and j < k");
  if (ell == j) return {1.0, 0.0, 0.0};
  if (ell == k) return {0.0, 1.0, 0.0};

  const double a_j = s.alpha(j);
  const double a_l = s.alpha(ell);
  const double a_k = s.alpha(k);
  const double denom = 1.0 - a_k / a_j;
  const double near = 1.0 - a_k / a_l;  // variance of q_{k|ell}
  const double far = 1.0 - a_l / a_j;   // variance of q_{ell|j}
  return {std::sqrt(a_l / a_j) * near / denom, std::sqrt(a_k / a_l) * far / denom, far * near / denom};
}

Vector bridge_mean(const BridgeParams& p, const Vector& x_lo, const Vector& x_hi) {
  require(x_lo.size() == x_hi.size(), "bridge endpoints must share a dimension");
  return p.w_lo * x_lo + p.w_hi * x_hi;
}

Vector bridge_sample(const BridgeParams& p, const Vector& x_lo, const Vector& x_hi, Rng& rng) {
  Vector out = bridge_mean(p, x_lo, x_hi);
  if (p.var > 0.0) out += std::sqrt(p.var) * rng.normal_vector(out.size());
  return out;
}

MidpointPlan::MidpointPlan(std::vector<int> ell, std::optional<double> eta)
    : ell_(std::move(ell)), eta_(eta) {
  const int n = static_cast<int>(ell_.size());
  require(n >= 1, "plan must cover at least one step");
  require(ell_.back() == n, "plan must end with ell_n = n");
  require(ell_.front() == 1, "plan must start with ell_1 = 1");
  for (int k = 1; k < n; ++k) {
    const int l = ell_[static_cast<std::size_t>(k - 1)];
    require(1 <= l && l <= k, "plan entries must satisfy 1 <= ell_k <= k");
  }
}

MidpointPlan MidpointPlan::from_sequence(std::vector<int> ell) { return MidpointPlan(std::move(ell)); }

MidpointPlan midpoint_plan(int n, double eta) {
  require(n >= 1, "plan needs n >= 1");
  require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
  std::vector<int> ell(static_cast<std::size_t>(n));
  for (int k = 1; k < n; ++k) {
    const int raw = static_cast<int>(std::floor(eta * k));
    ell[static_cast<std::size_t>(k - 1)] = std::clamp(raw, 1, k);
  }
  ell.back() = n;
  return MidpointPlan(std::move(ell), eta);
}

MidpointPlan piecewise_half_plan(int n) {
  std::vector<int> ell(static_cast<std::size_t>(n));
  for (int k = 1; k < n; ++k) {
    ell[static_cast<std::size_t>(k - 1)] = k >= n / 2 ? std::max(1, k / 2) : k;
  }
  ell.back() = n;
  return MidpointPlan::from_sequence(std::move(ell));
}

}  // namespace mgps
