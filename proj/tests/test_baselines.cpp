#include <cmath>
#include <stdexcept>
#include <limits>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "spotvol/baselines.hpp"
#include "spotvol/experiments.hpp"
#include "spotvol/rng.hpp"

using namespace spotvol;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

TEST_CASE("epanechnikov values and shape") {
  CHECK(epanechnikov(0.0) == 0.75);
  CHECK(epanechnikov(1.0) == 0.0);
  CHECK(epanechnikov(2.0) == 0.0);
  CHECK(epanechnikov(-2.0) == 0.0);

  NormalStream rng(41, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const double u = -2.0 + 4.0 * rng.uniform();
    CHECK(epanechnikov(u) == epanechnikov(-u));
    CHECK(epanechnikov(u) >= 0.0);
  }

  // integral over the support by Simpson, tolerance 1e-6
  const int n = 200;
  const double h = 2.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = -1.0 + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    s += w * epanechnikov(u);
  }
  CHECK(s * h / 3.0 == doctest::Approx(1.0).epsilon(1e-6));
}

namespace {

// Path whose squared scaled increments follow z(x): stepping by
// sqrt(z(x_k) dt) puts response z(x_k) exactly at regressor x_k.
template <typename F>
Path path_with_response(double x0, int steps, double dt, F&& z) {
  Path p{dt, {x0}};
  for (int k = 0; k < steps; ++k) {
    const double x = p.values.back();
    p.values.push_back(x + std::sqrt(z(x) * dt));
  }
  return p;
}

}  // namespace

TEST_CASE("local_linear_fit constant response") {
  // Distinct regressors, every Z* equal: the fit is (v, 0).
  const double dt = 0.01, v = 0.36;
  const Path p = path_with_response(0.0, 5, dt, [&](double) { return v; });
  const LocalLinearFit fit =
      local_linear_fit(p, p.values[2], KernelConfig{0.5});
  CHECK(fit.beta0 == doctest::Approx(v).epsilon(1e-12));
  CHECK(fit.beta1 == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("local_linear_fit recovers an affine response exactly") {
  const double dt = 0.01;
  const auto z = [](double x) { return 0.2 + 0.5 * x; };
  const Path p = path_with_response(0.0, 6, dt, z);
  const double x0 = p.values[3];
  const LocalLinearFit fit = local_linear_fit(p, x0, KernelConfig{1.0});
  CHECK(fit.beta0 == doctest::Approx(z(x0)).epsilon(1e-10));
  CHECK(fit.beta1 == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("local_linear_fit matches a brute-force weighted solve") {
  NormalStream rng(42, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const double dt = 0.02;
    Path p{dt, {}};
    double x = 0.5;
    p.values.push_back(x);
    for (int k = 0; k < 50; ++k) {
      x += 0.05 * rng.next();
      p.values.push_back(x);
    }
    const double h = 0.15;
    const double x0 = p.values[10];
    LocalLinearFit got;
    try {
      got = local_linear_fit(p, x0, KernelConfig{h});
    } catch (const std::runtime_error&) {
      continue;  // sparse neighborhood; nothing to compare
    }
    // brute force in long double over all pairs, no sorting or windowing
    long double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (std::size_t k = 0; k + 1 < p.values.size(); ++k) {
      const long double d = p.values[k] - x0;
      const long double u = d / h;
      if (fabsl(u) > 1.0L) continue;
      const long double w = 0.75L * (1.0L - u * u) / h;
      const long double dx = p.values[k + 1] - p.values[k];
      const long double z = dx * dx / dt;
      s0 += w;
      s1 += w * d;
      s2 += w * d * d;
      t0 += w * z;
      t1 += w * d * z;
    }
    const long double det = s0 * s2 - s1 * s1;
    const long double beta1 = (s0 * t1 - s1 * t0) / det;
    const long double beta0 = (t0 - beta1 * s1) / s0;
    CHECK(got.beta0 ==
          doctest::Approx(static_cast<double>(beta0)).epsilon(1e-8));
    CHECK(got.beta1 ==
          doctest::Approx(static_cast<double>(beta1)).epsilon(1e-8));
  }
}

TEST_CASE("local_linear_fit attains the weighted least-squares minimum") {
  NormalStream rng(43, 0);
  Path p{0.02, {}};
  double x = 0.5;
  p.values.push_back(x);
  for (int k = 0; k < 60; ++k) {
    x += 0.04 * rng.next();
    p.values.push_back(x);
  }
  const double h = 0.2, x0 = p.values[30];
  const LocalLinearFit fit = local_linear_fit(p, x0, KernelConfig{h});
  const auto objective = [&](double b0, double b1) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < p.values.size(); ++k) {
      const double d = p.values[k] - x0;
      const double w = epanechnikov(d / h) / h;
      const double dx = p.values[k + 1] - p.values[k];
      const double z = dx * dx / p.dt;
      const double r = z - b0 - b1 * d;
      s += w * r * r;
    }
    return s;
  };
  const double at_fit = objective(fit.beta0, fit.beta1);
  for (int rep = 0; rep < 100; ++rep) {
    const double db0 = 1e-3 * rng.next();
    const double db1 = 1e-3 * rng.next();
    CHECK(at_fit <= objective(fit.beta0 + db0, fit.beta1 + db1) + 1e-15);
  }
}

TEST_CASE("local_linear_fit error for empty neighborhoods") {
  Path p{0.01, {0.0, 0.01, 0.02, 0.03}};
  CHECK_THROWS_WITH_AS(local_linear_fit(p, 5.0, KernelConfig{0.1}),
                       doctest::Contains("bandwidth too small"),
                       std::runtime_error);
}

TEST_CASE("local_linear_series delegation and markers") {
  Path p{0.01, {0.0, 0.02, 0.05, 0.04, 0.08, 0.1}};
  const KernelConfig cfg{0.1};
  CHECK(local_linear_series(p, {}, cfg).empty());

  const std::vector<double> single = {0.04};
  const auto got = local_linear_series(p, single, cfg);
  REQUIRE(got.size() == 1);
  CHECK(got[0] ==
        doctest::Approx(local_linear_fit(p, 0.04, cfg).beta0).epsilon(1e-14));

  const std::vector<double> with_miss = {0.04, 99.0};
  const auto mixed = local_linear_series(p, with_miss, cfg);
  CHECK(std::isfinite(mixed[0]));
  CHECK(std::isnan(mixed[1]));
}

TEST_CASE("local_linear_series recovers constant volatility") {
  // sigma = 0.2 paths: the average estimate over interior states should land
  // within 15% of g = 0.04 across 50 paths.
  ModelSpec model{1.0, -1.0, DiffusionKind::kPower, 0.2, 0.0, 1.0};
  SimConfig cfg;
  cfg.gen_dt = 1.0 / 64000.0;
  cfg.sample_dt = 1.0 / 16000.0;
  cfg.burn_in_span = 0.0;
  cfg.total_span = 2000.0 / 16000.0;
  cfg.seed = 4242;
  const KernelConfig kernel{0.15};
  double total = 0.0;
  long count = 0;
  for (int path_i = 0; path_i < 50; ++path_i) {
    const Path p = generate_scenario(model, cfg, path_i);
    double lo = p.values[0], hi = p.values[0];
    for (const double v : p.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::vector<double> interior;
    for (const double v : p.values) {
      if (v > lo + 0.2 * (hi - lo) && v < hi - 0.2 * (hi - lo)) {
        interior.push_back(v);
      }
    }
    for (const double est : local_linear_series(p, interior, kernel)) {
      if (std::isfinite(est)) {
        total += est;
        ++count;
      }
    }
  }
  CHECK(total / count == doctest::Approx(0.04).epsilon(0.15));
}

TEST_CASE("realized_vol basics") {
  CHECK(realized_vol(Path{0.1, {0.0, 0.1, 0.0}}) ==
        doctest::Approx(0.02).epsilon(1e-14));
  CHECK(realized_vol(Path{0.1, {0.5, 0.5, 0.5, 0.5}}) == 0.0);
  CHECK_THROWS_AS(realized_vol(Path{0.1, {0.5}}), std::invalid_argument);
}

TEST_CASE("realized_vol shift invariance") {
  NormalStream rng(44, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    Path p{0.01, {}};
    p.values.resize(20);
    for (auto& v : p.values) v = rng.next();
    Path q = p;
    const double shift = rng.next();
    for (auto& v : q.values) v += shift;
    CHECK(realized_vol(q) == doctest::Approx(realized_vol(p)).epsilon(1e-9));
  }
}

TEST_CASE("realized_vol approximates integrated volatility") {
  // Constant-volatility model over span 0.125: the mean of R across 100
  // paths sits within 10% of 0.04 * 0.125.
  ModelSpec model{1.0, -1.0, DiffusionKind::kPower, 0.2, 0.0, 1.0};
  SimConfig cfg;
  cfg.gen_dt = 1.0 / 64000.0;
  cfg.sample_dt = 1.0 / 16000.0;
  cfg.burn_in_span = 0.0;
  cfg.total_span = 0.125;
  cfg.seed = 4545;
  double total = 0.0;
  const int n_paths = 100;
  for (int i = 0; i < n_paths; ++i) {
    total += realized_vol(generate_scenario(model, cfg, i));
  }
  CHECK(total / n_paths == doctest::Approx(0.04 * 0.125).epsilon(0.10));
}

TEST_CASE("integrated_vol left Riemann sum") {
  std::vector<double> spot(101, 4.0);
  CHECK(integrated_vol(spot, 0.01) == doctest::Approx(4.0).epsilon(1e-12));
  const std::vector<double> one = {3.0};
  CHECK(integrated_vol(one, 0.01) == 0.0);
}

TEST_CASE("integrated_vol is linear in the spot sequence") {
  NormalStream rng(45, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 20);
    std::vector<double> a(n), b(n), combo(n);
    const double s = rng.next(), t = rng.next();
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = rng.next();
      b[k] = rng.next();
      combo[k] = s * a[k] + t * b[k];
    }
    const double dt = 0.01 + rng.uniform();
    CHECK(integrated_vol(combo, dt) ==
          doctest::Approx(s * integrated_vol(a, dt) + t * integrated_vol(b, dt))
              .epsilon(1e-10));
  }
}

TEST_CASE("rmse basics and oracle") {
  const std::vector<double> ones = {1.0, 1.0};
  const std::vector<double> zeros = {0.0, 0.0};
  CHECK(rmse(ones, ones) == 0.0);
  CHECK(rmse(ones, zeros) == 1.0);

  NormalStream rng(46, 0);
  std::vector<double> est(10), truth(10);
  for (int k = 0; k < 10; ++k) {
    est[k] = rng.next();
    truth[k] = rng.next();
  }
  long double acc = 0.0;
  for (int k = 9; k >= 0; --k) {  // reversed accumulation order
    const long double d = est[k] - truth[k];
    acc += d * d;
  }
  const double want = static_cast<double>(sqrtl(acc / 10.0));
  CHECK(rmse(est, truth) == doctest::Approx(want).epsilon(1e-12));

  est[3] = kNaN;
  CHECK(std::isfinite(rmse(est, truth)));  // pairwise exclusion
  std::vector<double> all_nan(4, kNaN);
  std::vector<double> t4(4, 0.0);
  CHECK_THROWS_AS(rmse(all_nan, t4), std::runtime_error);
}
