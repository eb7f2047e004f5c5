#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spotvol/rng.hpp"

namespace spotvol {

enum class DiffusionKind {
  kPower,        // sigma(x) = s0 * x^rho, evaluated at max(x, 0)
  kGaussDamped,  // sigma(x) = sqrt(x * exp(-x^2)), evaluated at max(x, 0)
};

/// One-dimensional diffusion dX = (alpha + beta X) dt + sigma(X) dB.
/// Ground truth for simulation and for error measurement.
struct ModelSpec {
  double drift_alpha = 0.0;
  double drift_beta = 0.0;
  DiffusionKind diffusion = DiffusionKind::kPower;
  double s0 = 0.0;   // power family scale, >= 0
  double rho = 0.0;  // power family exponent
  double x0 = 1.0;   // starting value, > 0

  double mu(double x) const { return drift_alpha + drift_beta * x; }
  double mu_prime() const { return drift_beta; }

  /// Diffusion coefficient with full truncation: the argument is floored at 0
  /// before evaluation, so CIR-type powers stay defined on Euler excursions
  /// below zero.
  double sigma(double x) const {
    const double xp = x > 0.0 ? x : 0.0;
    if (diffusion == DiffusionKind::kGaussDamped) {
      return std::sqrt(xp * std::exp(-xp * xp));
    }
    if (rho == 0.0) return s0;
    if (rho == 0.5) return s0 * std::sqrt(xp);
    if (rho == 1.0) return s0 * xp;
    if (rho == 1.5) return s0 * xp * std::sqrt(xp);
    return s0 * std::pow(xp, rho);
  }

  /// Spot volatility g(x) = sigma(x)^2.
  double g(double x) const {
    const double xp = x > 0.0 ? x : 0.0;
    if (diffusion == DiffusionKind::kGaussDamped) {
      return xp * std::exp(-xp * xp);
    }
    if (rho == 0.0) return s0 * s0;
    if (rho == 0.5) return s0 * s0 * xp;
    if (rho == 1.0) return s0 * s0 * xp * xp;
    if (rho == 1.5) return s0 * s0 * xp * xp * xp;
    const double s = s0 * std::pow(xp, rho);
    return s * s;
  }
};

struct SimConfig {
  double gen_dt = 0.0;        // data-generating step
  double sample_dt = 0.0;     // observation step, integer multiple of gen_dt
  double burn_in_span = 0.0;  // time discarded before observations
  double total_span = 0.0;    // time span of retained observations
  std::uint64_t seed = 0;
};

/// Equidistant discrete observations (X_{t_0}, ..., X_{t_N}) with step dt.
struct Path {
  double dt = 0.0;
  std::vector<double> values;
};

/// Euler scheme for ModelSpec; n_steps + 1 values starting at model.x0.
/// Throws std::runtime_error("path diverged ...") on a non-finite value.
Path euler_simulate(const ModelSpec& model, double gen_dt, long n_steps,
                    NormalStream& rng);

/// Keeps indices 0, stride, 2*stride, ...; dt scales by stride.
Path subsample(const Path& path, long stride);

/// Simulates burn_in_span + total_span at gen_dt, discards the burn-in and
/// subsamples the rest to sample_dt. Deterministic given (model, config,
/// path_index).
Path generate_scenario(const ModelSpec& model, const SimConfig& config,
                       std::uint64_t path_index = 0);

}  // namespace spotvol
