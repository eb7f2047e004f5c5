#pragma once

#include "spotvol/filter.hpp"
#include "spotvol/sde.hpp"

namespace spotvol {

struct DriftEstimate {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double residual_ss = 0.0;
};

/// Least squares for linear drift on the exact conditional mean.  The mean is
/// affine in the previous observation, X_k = c0 + c1 X_{k-1} + e_k, so the
/// optimum is the closed-form regression with beta = ln(c1)/dt and
/// alpha = c0 * beta / (c1 - 1).  Throws "drift not identified" when the
/// regression is degenerate (constant path, c1 <= 0, or c1 == 1).
DriftEstimate drift_lse(const Path& path);

struct ThetaSearchConfig {
  double theta_min_abs = 1e-4;
  double theta_max_abs = 1e3;
  int grid_points = 41;
  int refine_iters = 40;
};

/// Gaussian quasi-log-likelihood of the one-step predictive densities,
/// accumulated over the post-window observations.  Steps whose predictive
/// variance is skipped by the filter contribute nothing; if every step is
/// skipped the likelihood is undefined and a runtime_error is thrown.
/// `skipped`, when given, receives the skip count.
double log_likelihood(const Path& path, const FilterParams& params,
                      long init_window_len, long* skipped = nullptr);

/// Quasi-MLE for theta: a signed log-spaced grid over +/-[min_abs, max_abs]
/// (grid_points candidates total, positives get the extra point when odd),
/// then golden-section refinement in log-magnitude around the best grid
/// point. Candidates with undefined likelihood are dropped; the returned
/// theta always attains a likelihood >= every surviving grid candidate.
/// base carries y1_init / y_floor and the drift estimate is applied on top.
double theta_qmle(const Path& path, const DriftEstimate& drift,
                  const ThetaSearchConfig& search, long init_window_len,
                  const FilterParams& base = FilterParams{});

}  // namespace spotvol
