#include "spotvol/sde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spotvol {

namespace {

long exact_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const long n = std::llround(r);
  if (n < 1 || std::abs(r - n) > 1e-6 * std::max(1.0, std::abs(r))) {
    throw std::invalid_argument(std::string(what) +
                                " must be a positive integer ratio");
  }
  return n;
}

}  // namespace

Path euler_simulate(const ModelSpec& model, double gen_dt, long n_steps,
                    NormalStream& rng) {
  if (!(gen_dt > 0.0)) throw std::invalid_argument("gen_dt must be positive");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  Path path;
  path.dt = gen_dt;
  path.values.resize(n_steps + 1);
  const double sdt = std::sqrt(gen_dt);
  double x = model.x0;
  path.values[0] = x;
  for (long k = 0; k < n_steps; ++k) {
    x += model.mu(x) * gen_dt + model.sigma(x) * sdt * rng.next();
    if (!std::isfinite(x)) {
      throw std::runtime_error("path diverged at step " + std::to_string(k + 1));
    }
    path.values[k + 1] = x;
  }
  return path;
}

Path subsample(const Path& path, long stride) {
  if (stride < 1) throw std::invalid_argument("subsample stride must be >= 1");
  Path out;
  out.dt = path.dt * stride;
  out.values.reserve(path.values.size() / stride + 1);
  for (std::size_t i = 0; i < path.values.size();
       i += static_cast<std::size_t>(stride)) {
    out.values.push_back(path.values[i]);
  }
  return out;
}

Path generate_scenario(const ModelSpec& model, const SimConfig& config,
                       std::uint64_t path_index) {
  if (!(config.gen_dt > 0.0) || !(config.sample_dt > 0.0)) {
    throw std::invalid_argument("time steps must be positive");
  }
  if (!(config.total_span > 0.0) || config.burn_in_span < 0.0) {
    throw std::invalid_argument("invalid simulation spans");
  }
  const long stride = exact_ratio(config.sample_dt, config.gen_dt,
                                  "sample_dt / gen_dt");
  const long n_obs = exact_ratio(config.total_span, config.sample_dt,
                                 "total_span / sample_dt");
  const long n_burn = std::llround(config.burn_in_span / config.gen_dt);

  NormalStream rng(config.seed, path_index);
  const double sdt = std::sqrt(config.gen_dt);
  double x = model.x0;
  long step = 0;
  auto advance = [&](long count) {
    for (long j = 0; j < count; ++j) {
      x += model.mu(x) * config.gen_dt + model.sigma(x) * sdt * rng.next();
      ++step;
      if (!std::isfinite(x)) {
        throw std::runtime_error("path diverged at step " +
                                 std::to_string(step));
      }
    }
  };

  Path out;
  out.dt = config.sample_dt;
  out.values.reserve(n_obs + 1);
  advance(n_burn);
  out.values.push_back(x);
  for (long i = 0; i < n_obs; ++i) {
    advance(stride);
    out.values.push_back(x);
  }
  return out;
}

}  // namespace spotvol
