#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spotvol/sde.hpp"

namespace spotvol {

struct KernelConfig {
  double bandwidth = 0.15;  // h > 0; kernel fixed to Epanechnikov
};

/// Epanechnikov kernel (3/4)(1 - u^2) on |u| <= 1, else 0.
double epanechnikov(double u);

struct LocalLinearFit {
  double beta0 = 0.0;  // volatility estimate at x0
  double beta1 = 0.0;
};

/// Local linear regression of squared scaled increments
/// Z*_k = (X_k - X_{k-1})^2 / dt on X_{k-1}, weighted by K((X_{k-1}-x0)/h)/h.
/// Throws "bandwidth too small at x0" when fewer than two points carry
/// weight or the weighted design is singular.
LocalLinearFit local_linear_fit(const Path& path, double x0,
                                const KernelConfig& config);

/// Fitted pairs prepared once; used to evaluate the local linear estimate at
/// many points (in-sample or held-out).
class LocalLinearData {
 public:
  LocalLinearData(const Path& path, const KernelConfig& config);
  /// Weighted normal-equations solve at x0; empty when fewer than two points
  /// carry weight or the design is singular.
  std::optional<LocalLinearFit> fit(double x0) const;
  /// beta0 at x0, or quiet NaN when the fit fails there.
  double estimate(double x0) const;

 private:
  double h_;
  std::vector<double> xs_;  // sorted regressors X_{k-1}
  std::vector<double> zs_;  // matching responses Z*_k
};

/// Per-point beta0; failures become quiet NaN markers.
std::vector<double> local_linear_series(const Path& path,
                                        std::span<const double> eval_points,
                                        const KernelConfig& config);

/// Sum of squared increments.
double realized_vol(const Path& path);

/// Left-endpoint Riemann sum of a spot-volatility series.
double integrated_vol(std::span<const double> spot, double dt);

/// Root mean squared error; NaN entries are excluded pairwise.  Throws when
/// no valid pair remains.
double rmse(std::span<const double> estimates, std::span<const double> truth);

}  // namespace spotvol
