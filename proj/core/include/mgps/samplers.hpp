#pragma once

#include "mgps/likelihood.hpp"
#include "mgps/priors.hpp"
#include "mgps/schedule.hpp"
#include "mgps/variational.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mgps {

/// Number of Adam steps M_k per denoising step:
/// `high` when k >= n - tail or (stride > 0 and k mod stride == 0), `base` otherwise.
struct GradStepRule {
  int tail = 5;
  int stride = 10;
  int high = 20;
  int base = 2;

  int count(Step k, int n) const;
  /// Same count at every step.
  static GradStepRule constant(int m) { return {0, 0, m, m}; }
};

struct MgpsConfig {
  MidpointPlan plan;
  GradStepRule grad_steps{};
  AdamOptions adam{};
  /// Warm start applies for k >= warm_start (only used by mgps_warmstart_sample).
  std::optional<int> warm_start;
  /// Monte Carlo draws averaged per gradient evaluation.
  int n_mc = 1;

  void validate(int n) const;
};

struct DpsConfig {
  double zeta = 1.0;
  /// Guard added inside the residual norm.
  double norm_eps = 1e-12;
};

enum class PgdmWeight { SqrtAlphaPair, SqrtAlpha };

/// Scaling of the Gaussian-integrated guidance gradient.
/// Precision: the plain gradient of log N(y; A m, sigma_y^2 I + v A A^T).
/// VarianceScaled: the same gradient multiplied by v_{k+1}, which tends to the
/// pseudo-inverse correction A^+ (y - A m) when v_{k+1} A A^T dominates sigma_y^2.
enum class PgdmScaling { Precision, VarianceScaled };

struct PgdmConfig {
  PgdmWeight weight = PgdmWeight::SqrtAlphaPair;
  PgdmScaling scaling = PgdmScaling::VarianceScaled;
};

struct ChainOptions {
  bool record_trace = false;
};

struct ChainResult {
  Vector x0;
  bool diverged = false;
  double wall_time = 0.0;
  /// (k, X_k) from k = n down to 1 when tracing is enabled.
  std::vector<std::pair<Step, Vector>> trace;
};

ChainResult mgps_sample(const Denoiser& denoiser, const Likelihood& lik, const MgpsConfig& cfg, Rng& rng,
                        ChainOptions options = {});

/// One warm-start refinement at step k. Returns (X_k, X_hat_1).
/// `steps` Adam iterations are run on the warm-start objective.
std::pair<Vector, Vector> warm_start_step(Step k, Step ell, const Vector& x_ell_hat, const Vector& x_next, int steps,
                                          const Denoiser& denoiser, const Likelihood& lik, const AdamOptions& adam,
                                          int n_mc, Rng& rng);

/// MGPS with warm start for k >= cfg.warm_start (defaults to floor(3n/4) when unset).
ChainResult mgps_warmstart_sample(const Denoiser& denoiser, const Likelihood& lik, const MgpsConfig& cfg, Rng& rng,
                                  ChainOptions options = {});

ChainResult dps_sample(const Denoiser& denoiser, const Likelihood& lik, const DpsConfig& cfg, Rng& rng,
                       ChainOptions options = {});

/// Guidance term of PGDM at (k, x): J^T A^T (sigma_y^2 I + v_k A A^T)^{-1} (y - A m_{0|k}(x)), unweighted.
Vector pgdm_guidance(const Denoiser& denoiser, const LinearGaussianLikelihood& lik, Step k, const Vector& x);

ChainResult pgdm_sample(const Denoiser& denoiser, const LinearGaussianLikelihood& lik, const PgdmConfig& cfg,
                        Rng& rng, ChainOptions options = {});

/// Plain DDPM ancestral sampling with the exact denoiser (no guidance).
ChainResult ddpm_sample(const Denoiser& denoiser, Rng& rng, ChainOptions options = {});

}  // namespace mgps
