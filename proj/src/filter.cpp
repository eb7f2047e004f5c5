#include "spotvol/filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spotvol/numerics.hpp"

namespace spotvol {

namespace {

double init_state_span(const double* values, long count, double dt,
                       double y_floor) {
  if (count < 2) {
    throw std::invalid_argument("init window needs at least 2 values");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("init window dt must be positive");
  double ss = 0.0;
  for (long k = 1; k < count; ++k) {
    const double d = values[k] - values[k - 1];
    ss += d * d;
  }
  return std::max(y_floor, ss / (static_cast<double>(count - 1) * dt));
}

}  // namespace

void validate(const FilterParams& params) {
  if (!(std::abs(params.theta) >= kThetaMinAbs)) {
    throw std::invalid_argument("filter params: |theta| below minimum " +
                                std::to_string(kThetaMinAbs));
  }
  if (!(params.y_floor > 0.0)) {
    throw std::invalid_argument("filter params: y_floor must be positive");
  }
}

LocalCoeffs local_coeffs(const FilterState& state, const FilterParams& params) {
  LocalCoeffs c;
  c.a = params.beta_hat;
  // Linear drift makes the local linearization exact: mu(x) - mu'(x) x == alpha.
  c.alpha_s = params.alpha_hat;
  c.b = c.a * state.y1_s;
  c.c = 0.5 * params.theta;
  const double scale = std::max({1.0, std::abs(c.a), std::abs(c.c)});
  c.degenerate = std::abs(c.c - c.a) < kDegenTol * scale;
  if (!c.degenerate) {
    c.q = c.b / (c.c - c.a);
    c.p = -c.q;
  }
  return c;
}

Mat2 mat_exp(const LocalCoeffs& coeffs, double dt) {
  Mat2 m;
  m.m11 = std::exp(coeffs.a * dt);
  m.m12 = 0.0;
  m.m22 = std::exp(coeffs.c * dt);
  // q e^{c dt} + p e^{a dt} == b (e^{c dt} - e^{a dt}) / (c - a); the expint
  // form is identical off the diagonal locus and carries the b dt e^{a dt}
  // limit across it.
  m.m21 = coeffs.b * m.m11 * expint(coeffs.c - coeffs.a, dt);
  return m;
}

// The moment map of the bilinear pair
//   dX = (alpha_s + a X) dt + sqrt(Y) dB
//   dY = y1 dX + c Y dt
// over one step.  With mu_s = alpha_s + a x_s the conditional mean of Y is
//   m_Y(u) = y e^{c u} + y1 mu_s (e^{c u} - e^{a u}) / (c - a)
// and the covariance blocks are integrals of m_Y against exponentials in
// 2a, a + c and 2c.  Every ratio collapses into divided differences of
// d -> e^{d dt} over nodes drawn from {0, a, c, 2a, a+c, 2c}, which keeps all
// five outputs smooth across a = c, a = 0, 2a = c, a + c = 0 and 2c = a.
MomentKernel::MomentKernel(double a, double c, double alpha_s, double dt)
    : a_(a), c_(c), alpha_s_(alpha_s) {
  const double r1 = 2.0 * a, r2 = a + c, r3 = 2.0 * c;
  double nodes[5];
  double out[5];

  nodes[0] = a; nodes[1] = c; nodes[2] = r1; nodes[3] = r2; nodes[4] = r3;
  exp_divdiff_prefixes(nodes, 5, dt, out);
  f_a_ = out[0]; f_ac_ = out[1]; f_ac1_ = out[2]; f_ac12_ = out[3];
  f_ac123_ = out[4];

  nodes[0] = c; nodes[1] = r1; nodes[2] = r2; nodes[3] = r3;
  exp_divdiff_prefixes(nodes, 4, dt, out);
  f_c_ = out[0]; f_c1_ = out[1]; f_c12_ = out[2]; f_c123_ = out[3];

  nodes[0] = c; nodes[1] = r2; nodes[2] = r3;
  exp_divdiff_prefixes(nodes, 3, dt, out);
  f_c2_ = out[1]; f_c23_ = out[2];

  nodes[0] = a; nodes[1] = c; nodes[2] = r2; nodes[3] = r3;
  exp_divdiff_prefixes(nodes, 4, dt, out);
  f_ac2_ = out[2]; f_ac23_ = out[3];

  nodes[0] = c; nodes[1] = r3;
  exp_divdiff_prefixes(nodes, 2, dt, out);
  f_c3_ = out[1];

  nodes[0] = a; nodes[1] = c; nodes[2] = r3;
  exp_divdiff_prefixes(nodes, 3, dt, out);
  f_ac3_ = out[2];

  nodes[0] = a; nodes[1] = 0.0; nodes[2] = c;
  exp_divdiff_prefixes(nodes, 3, dt, out);
  f_a0_ = out[1]; f_a0c_ = out[2];

  nodes[0] = c; nodes[1] = 0.0;
  exp_divdiff_prefixes(nodes, 2, dt, out);
  f_c0_ = out[1];
}

MomentPair MomentKernel::eval(double x_s, double y_filt, double y1_s) const {
  MomentPair m;
  const double b = a_ * y1_s;
  const double mu_s = alpha_s_ + a_ * x_s;
  const double fwd = y1_s * mu_s;  // forcing weight of the Y mean

  m.mean_x = f_a_ * x_s + alpha_s_ * f_a0_;
  m.mean_y = b * f_ac_ * x_s + f_c_ * y_filt +
             alpha_s_ * (b * f_a0c_ + y1_s * f_c0_);

  const double i1 = fwd * f_ac1_ + y_filt * f_c1_;
  const double i2 = fwd * f_ac2_ + y_filt * f_c2_;
  const double i3 = fwd * f_ac3_ + y_filt * f_c3_;
  m.v1 = i1;
  m.v2 = b * (fwd * f_ac12_ + y_filt * f_c12_) + y1_s * i2;
  m.v3 = 2.0 * b * b * (fwd * f_ac123_ + y_filt * f_c123_) +
         2.0 * b * y1_s * (fwd * f_ac23_ + y_filt * f_c23_) +
         y1_s * y1_s * i3;
  return m;
}

MomentPair cond_moments(const FilterState& state, const LocalCoeffs& coeffs,
                        double dt) {
  const MomentKernel kernel(coeffs.a, coeffs.c, coeffs.alpha_s, dt);
  return kernel.eval(state.x_s, state.y_filt, state.y1_s);
}

MomentPair predict(const FilterState& state, const FilterParams& params,
                   double dt) {
  return cond_moments(state, local_coeffs(state, params), dt);
}

double update(const MomentPair& pred, double x_obs, const FilterParams& params,
              FilterDiagnostics* diag) {
  double y = pred.mean_y;
  bool executed = false;
  if (pred.v1 > kV1Floor && std::isfinite(pred.v1)) {
    const double kappa = pred.v2 / pred.v1;
    if (std::isfinite(kappa)) {
      y += kappa * (x_obs - pred.mean_x);
      executed = true;
    }
  }
  if (!executed && diag != nullptr) ++diag->skipped_updates;
  if (!(y >= params.y_floor)) {  // also catches non-finite y
    y = params.y_floor;
    if (diag != nullptr) ++diag->floor_hits;
  }
  return y;
}

double advance_y1(double y1_s, double theta, double x_new, double x_old) {
  return y1_s + theta * (x_new - x_old);
}

double init_state(const Path& window, double y_floor) {
  return init_state_span(window.values.data(),
                         static_cast<long>(window.values.size()), window.dt,
                         y_floor);
}

FilterRecursion::FilterRecursion(const FilterParams& params, double dt,
                                 double x_start, double y_start)
    : params_(params),
      dt_(dt),
      kernel_(params.beta_hat, 0.5 * params.theta, params.alpha_hat, dt),
      state_{x_start, std::max(y_start, params.y_floor), params.y1_init, 0} {}

FilterRecursion::Step FilterRecursion::advance(double x_obs) {
  Step step;
  step.pred = kernel_.eval(state_.x_s, state_.y_filt, state_.y1_s);
  const long skipped_before = diag_.skipped_updates;
  step.y_filt = update(step.pred, x_obs, params_, &diag_);
  step.skipped = diag_.skipped_updates != skipped_before;
  state_.y1_s = advance_y1(state_.y1_s, params_.theta, x_obs, state_.x_s);
  state_.x_s = x_obs;
  state_.y_filt = step.y_filt;
  ++state_.k;
  return step;
}

FilterResult run_filter(const Path& path, const FilterParams& params,
                        long init_window_len) {
  validate(params);
  if (init_window_len < 2) {
    throw std::invalid_argument("init window must cover at least 2 values");
  }
  const long n = static_cast<long>(path.values.size());
  if (n <= init_window_len) {
    throw std::invalid_argument("path shorter than init window plus one");
  }
  const double y0 = init_state_span(path.values.data(), init_window_len,
                                    path.dt, params.y_floor);
  FilterRecursion rec(params, path.dt, path.values[init_window_len - 1], y0);

  FilterResult result;
  result.series.dt = path.dt;
  result.series.rows.reserve(n - init_window_len);
  for (long k = init_window_len; k < n; ++k) {
    const auto step = rec.advance(path.values[k]);
    result.series.rows.push_back({path.values[k], step.y_filt});
  }
  result.diagnostics = rec.diagnostics();
  return result;
}

}  // namespace spotvol
