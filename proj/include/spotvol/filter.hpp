#pragma once

#include <vector>

#include "spotvol/sde.hpp"

namespace spotvol {

inline constexpr double kThetaMinAbs = 1e-6;  // |theta| floor at construction
inline constexpr double kV1Floor = 1e-30;     // below this the update is skipped
inline constexpr double kDegenTol = 1e-8;     // relative |c - a| degeneracy test

/// Parameters of the volatility recursion: estimated drift (alpha_hat,
/// beta_hat), the global curvature surrogate theta, the initial slope state
/// and the positivity floor applied to filtered values.
struct FilterParams {
  double theta = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double y1_init = 0.0;
  double y_floor = 1e-12;
};

/// Throws std::invalid_argument when |theta| < kThetaMinAbs or y_floor <= 0.
void validate(const FilterParams& params);

/// Per-step state of the recursion: last observation x_s, filtered volatility
/// y_filt (>= y_floor) and the slope state y1_s.
struct FilterState {
  double x_s = 0.0;
  double y_filt = 0.0;
  double y1_s = 0.0;
  long k = 0;
};

/// Coefficients of the locally bilinear system frozen over one step:
///   d X = (alpha_s + a X) dt + sqrt(Y) dB
///   d Y = (b X + c Y + alpha_s * y1) dt + y1 sqrt(Y) dB
/// with a = beta_hat, b = a * y1_s, c = theta / 2.  p and q are the
/// off-diagonal expansion factors q = b/(c-a), p = -q; they are set to zero
/// and `degenerate` is flagged when |c - a| falls below the relative
/// tolerance (downstream evaluation does not divide by c - a in any case).
struct LocalCoeffs {
  double a = 0.0;
  double alpha_s = 0.0;
  double b = 0.0;
  double c = 0.0;
  double p = 0.0;
  double q = 0.0;
  bool degenerate = false;
};

/// One-step conditional mean and covariance of the bilinear pair (X, Y):
/// mean (mean_x, mean_y), covariance elements v1 = (1,1), v2 = (1,2),
/// v3 = (2,2).
struct MomentPair {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
};

struct Mat2 {
  double m11 = 0.0, m12 = 0.0;
  double m21 = 0.0, m22 = 0.0;
};

/// Filtered series aligned with the post-window observations.
struct EstimateSeries {
  struct Row {
    double x = 0.0;
    double y_filtered = 0.0;
  };
  double dt = 0.0;
  std::vector<Row> rows;
};

struct FilterDiagnostics {
  long skipped_updates = 0;
  long floor_hits = 0;
};

LocalCoeffs local_coeffs(const FilterState& state, const FilterParams& params);

/// exp(A * dt) for A = [[a, 0], [b, c]]; the (2,1) entry is evaluated as
/// b * e^{a dt} * expint(c - a, dt), which carries the b*dt*e^{a dt} limit
/// across c = a without a branch.
Mat2 mat_exp(const LocalCoeffs& coeffs, double dt);

/// Precomputed moment map for fixed (a, c, alpha_s, dt).  For linear drift
/// these are constant along a path, so one kernel serves a whole filter run;
/// eval() is then a handful of multiply-adds per observation.
class MomentKernel {
 public:
  MomentKernel(double a, double c, double alpha_s, double dt);
  MomentPair eval(double x_s, double y_filt, double y1_s) const;

 private:
  double a_, c_, alpha_s_;
  double f_a_, f_c_;        // e^{a dt}, e^{c dt}
  double f_a0_, f_c0_;      // expint(a, dt), expint(c, dt)
  double f_ac_, f_a0c_;     // f[a,c], f[a,0,c]
  double f_c1_, f_c2_, f_c3_;          // f[c, r_j]
  double f_ac1_, f_ac2_, f_ac3_;       // f[a, c, r_j]
  double f_c12_, f_c23_, f_c123_;      // f[c, r1, r2], f[c, r2, r3], f[c, r1, r2, r3]
  double f_ac12_, f_ac23_, f_ac123_;   // appended r-node divided differences
};

/// Conditional moments over horizon dt from the filtered state; exact for the
/// bilinear system, continuous across every coefficient degeneracy.
MomentPair cond_moments(const FilterState& state, const LocalCoeffs& coeffs,
                        double dt);

/// cond_moments evaluated at the filtered pair (x_s, y_filt); the covariance
/// is V_{t|s}(y_filt), i.e. taken at the filtered volatility.
MomentPair predict(const FilterState& state, const FilterParams& params,
                   double dt);

/// Filter update: mean_y + (v2/v1) * (x_obs - mean_x), floored at y_floor.
/// When v1 <= kV1Floor (or is not finite) the gain is zero and the event is
/// counted in diag->skipped_updates.
double update(const MomentPair& pred, double x_obs, const FilterParams& params,
              FilterDiagnostics* diag = nullptr);

/// Slope state recursion y1 + theta * (x_new - x_old).
double advance_y1(double y1_s, double theta, double x_new, double x_old);

/// Initial volatility from a leading window: time-averaged squared increments
/// sum (dX_k)^2 / (m * dt), floored at y_floor.
double init_state(const Path& window, double y_floor = 1e-12);

/// Step-by-step filter recursion; run_filter and the likelihood share it.
class FilterRecursion {
 public:
  FilterRecursion(const FilterParams& params, double dt, double x_start,
                  double y_start);

  struct Step {
    MomentPair pred;
    double y_filt = 0.0;
    bool skipped = false;
  };

  Step advance(double x_obs);
  const FilterState& state() const { return state_; }
  const FilterDiagnostics& diagnostics() const { return diag_; }

 private:
  FilterParams params_;
  double dt_;
  MomentKernel kernel_;
  FilterState state_;
  FilterDiagnostics diag_;
};

struct FilterResult {
  EstimateSeries series;
  FilterDiagnostics diagnostics;
};

/// Full recursion over a path: the first init_window_len values seed the
/// initial volatility, every later observation is filtered in turn.  The
/// returned series has one row per post-window observation.
FilterResult run_filter(const Path& path, const FilterParams& params,
                        long init_window_len);

}  // namespace spotvol
