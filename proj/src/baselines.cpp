#include "spotvol/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace spotvol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double epanechnikov(double u) {
  if (std::abs(u) > 1.0) return 0.0;
  return 0.75 * (1.0 - u * u);
}

LocalLinearData::LocalLinearData(const Path& path, const KernelConfig& config)
    : h_(config.bandwidth) {
  if (!(h_ > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (path.values.size() < 2 || !(path.dt > 0.0)) {
    throw std::invalid_argument("local linear fit needs at least 2 values");
  }
  const long m = static_cast<long>(path.values.size()) - 1;
  std::vector<long> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](long i, long j) {
    return path.values[i] < path.values[j];
  });
  xs_.resize(m);
  zs_.resize(m);
  for (long r = 0; r < m; ++r) {
    const long k = order[r];
    const double dx = path.values[k + 1] - path.values[k];
    xs_[r] = path.values[k];
    zs_[r] = dx * dx / path.dt;
  }
}

std::optional<LocalLinearFit> LocalLinearData::fit(double x0) const {
  const auto lo = std::lower_bound(xs_.begin(), xs_.end(), x0 - h_);
  const auto hi = std::upper_bound(lo, xs_.end(), x0 + h_);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
  long used = 0;
  for (auto it = lo; it != hi; ++it) {
    const double d = *it - x0;
    const double w = epanechnikov(d / h_) / h_;
    if (w <= 0.0) continue;
    const double z = zs_[it - xs_.begin()];
    s0 += w;
    s1 += w * d;
    s2 += w * d * d;
    t0 += w * z;
    t1 += w * d * z;
    ++used;
  }
  if (used < 2) return std::nullopt;
  const double det = s0 * s2 - s1 * s1;
  if (!(det > 1e-12 * std::max(s0 * s2, s1 * s1))) return std::nullopt;
  LocalLinearFit f;
  f.beta1 = (s0 * t1 - s1 * t0) / det;
  f.beta0 = (t0 - f.beta1 * s1) / s0;
  return f;
}

double LocalLinearData::estimate(double x0) const {
  const auto f = fit(x0);
  return f ? f->beta0 : kNaN;
}

LocalLinearFit local_linear_fit(const Path& path, double x0,
                                const KernelConfig& config) {
  const LocalLinearData data(path, config);
  const auto f = data.fit(x0);
  if (!f) {
    throw std::runtime_error("bandwidth too small at x0 = " +
                             std::to_string(x0));
  }
  return *f;
}

std::vector<double> local_linear_series(const Path& path,
                                        std::span<const double> eval_points,
                                        const KernelConfig& config) {
  std::vector<double> out;
  out.reserve(eval_points.size());
  if (eval_points.empty()) return out;
  const LocalLinearData data(path, config);
  for (const double x0 : eval_points) out.push_back(data.estimate(x0));
  return out;
}

double realized_vol(const Path& path) {
  if (path.values.size() < 2) {
    throw std::invalid_argument("realized volatility needs at least 2 values");
  }
  double sum = 0.0;
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    const double d = path.values[k] - path.values[k - 1];
    sum += d * d;
  }
  return sum;
}

double integrated_vol(std::span<const double> spot, double dt) {
  if (spot.empty()) throw std::invalid_argument("spot series is empty");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < spot.size(); ++k) sum += spot[k] * dt;
  return sum;
}

double rmse(std::span<const double> estimates, std::span<const double> truth) {
  if (estimates.size() != truth.size() || estimates.empty()) {
    throw std::invalid_argument("rmse needs equal non-empty sequences");
  }
  double ss = 0.0;
  long used = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (std::isnan(estimates[k]) || std::isnan(truth[k])) continue;
    const double d = estimates[k] - truth[k];
    ss += d * d;
    ++used;
  }
  if (used == 0) throw std::runtime_error("rmse has no valid pairs");
  return std::sqrt(ss / used);
}

}  // namespace spotvol
