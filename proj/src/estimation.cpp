#include "spotvol/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace spotvol {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

DriftEstimate drift_lse(const Path& path) {
  const auto& v = path.values;
  const long n = static_cast<long>(v.size());
  if (n < 3) throw std::invalid_argument("drift LSE needs at least 3 values");
  if (!(path.dt > 0.0)) throw std::invalid_argument("path dt must be positive");

  const long m = n - 1;
  double sx = 0.0, sy = 0.0;
  for (long k = 1; k < n; ++k) {
    sx += v[k - 1];
    sy += v[k];
  }
  const double xbar = sx / m, ybar = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (long k = 1; k < n; ++k) {
    const double dx = v[k - 1] - xbar;
    sxx += dx * dx;
    sxy += dx * (v[k] - ybar);
  }
  if (!(sxx > 0.0)) throw std::runtime_error("drift not identified");

  const double c1 = sxy / sxx;
  const double c0 = ybar - c1 * xbar;
  if (!(c1 > 0.0) || std::abs(c1 - 1.0) < 1e-12) {
    throw std::runtime_error("drift not identified");
  }

  DriftEstimate est;
  est.beta_hat = std::log(c1) / path.dt;
  est.alpha_hat = c0 * est.beta_hat / (c1 - 1.0);
  double rss = 0.0;
  for (long k = 1; k < n; ++k) {
    const double e = v[k] - c0 - c1 * v[k - 1];
    rss += e * e;
  }
  est.residual_ss = rss;
  return est;
}

double log_likelihood(const Path& path, const FilterParams& params,
                      long init_window_len, long* skipped) {
  validate(params);
  if (init_window_len < 2) {
    throw std::invalid_argument("init window must cover at least 2 values");
  }
  const long n = static_cast<long>(path.values.size());
  if (n <= init_window_len) {
    throw std::invalid_argument("path shorter than init window plus one");
  }
  Path window{path.dt,
              {path.values.begin(), path.values.begin() + init_window_len}};
  const double y0 = init_state(window, params.y_floor);
  FilterRecursion rec(params, path.dt, path.values[init_window_len - 1], y0);

  double ll = 0.0;
  long used = 0;
  for (long k = init_window_len; k < n; ++k) {
    const auto step = rec.advance(path.values[k]);
    if (step.skipped) continue;
    const double resid = path.values[k] - step.pred.mean_x;
    ll += -0.5 * std::log(2.0 * kPi * step.pred.v1) -
          resid * resid / (2.0 * step.pred.v1);
    ++used;
  }
  if (skipped != nullptr) *skipped = (n - init_window_len) - used;
  if (used == 0) throw std::runtime_error("likelihood undefined");
  return ll;
}

double theta_qmle(const Path& path, const DriftEstimate& drift,
                  const ThetaSearchConfig& search, long init_window_len,
                  const FilterParams& base) {
  if (!(search.theta_min_abs > 0.0) ||
      !(search.theta_min_abs < search.theta_max_abs)) {
    throw std::invalid_argument("theta search needs 0 < min_abs < max_abs");
  }
  if (search.grid_points < 3 || search.refine_iters < 0) {
    throw std::invalid_argument("theta search needs grid_points >= 3");
  }

  FilterParams params = base;
  params.alpha_hat = drift.alpha_hat;
  params.beta_hat = drift.beta_hat;
  const auto eval = [&](double theta) -> double {
    params.theta = theta;
    try {
      return log_likelihood(path, params, init_window_len);
    } catch (const std::runtime_error&) {
      return kNegInf;  // candidate dropped
    }
  };

  const double lmin = std::log(search.theta_min_abs);
  const double lmax = std::log(search.theta_max_abs);
  const auto magnitudes = [&](int count) {
    std::vector<double> m(count);
    if (count == 1) {
      m[0] = std::exp(0.5 * (lmin + lmax));
    } else {
      for (int i = 0; i < count; ++i) {
        m[i] = std::exp(lmin + (lmax - lmin) * i / (count - 1));
      }
    }
    return m;
  };
  const int n_pos = (search.grid_points + 1) / 2;
  const int n_neg = search.grid_points / 2;
  const std::vector<double> pos = magnitudes(n_pos);
  const std::vector<double> neg = magnitudes(n_neg);

  double best_theta = 0.0;
  double best_ll = kNegInf;
  int best_index = -1;
  bool best_positive = true;
  bool any = false;
  const auto consider = [&](double theta, double ll, int index, bool positive) {
    if (ll == kNegInf) return;
    any = true;
    const bool better =
        ll > best_ll ||
        (ll == best_ll && (std::abs(theta) < std::abs(best_theta) ||
                           (std::abs(theta) == std::abs(best_theta) &&
                            theta > best_theta)));
    if (better) {
      best_theta = theta;
      best_ll = ll;
      best_index = index;
      best_positive = positive;
    }
  };
  for (int i = 0; i < n_pos; ++i) consider(pos[i], eval(pos[i]), i, true);
  for (int i = 0; i < n_neg; ++i) consider(-neg[i], eval(-neg[i]), i, false);
  if (!any) throw std::runtime_error("likelihood undefined");

  // Golden-section refinement in log magnitude around the winning grid point,
  // sign held fixed.  The global best across every evaluation is returned, so
  // the result can never fall below a grid candidate.
  const std::vector<double>& side = best_positive ? pos : neg;
  const double sign = best_positive ? 1.0 : -1.0;
  if (search.refine_iters > 0 && side.size() >= 2 && best_index >= 0) {
    const int last = static_cast<int>(side.size()) - 1;
    double lo = std::log(side[std::max(0, best_index - 1)]);
    double hi = std::log(side[std::min(last, best_index + 1)]);
    const double invphi = 0.6180339887498949;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = eval(sign * std::exp(x1));
    double f2 = eval(sign * std::exp(x2));
    consider(sign * std::exp(x1), f1, best_index, best_positive);
    consider(sign * std::exp(x2), f2, best_index, best_positive);
    for (int it = 0; it < search.refine_iters; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + invphi * (hi - lo);
        f2 = eval(sign * std::exp(x2));
        consider(sign * std::exp(x2), f2, best_index, best_positive);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - invphi * (hi - lo);
        f1 = eval(sign * std::exp(x1));
        consider(sign * std::exp(x1), f1, best_index, best_positive);
      }
    }
  }
  return best_theta;
}

}  // namespace spotvol
