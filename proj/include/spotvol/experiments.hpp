#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spotvol/baselines.hpp"
#include "spotvol/estimation.hpp"
#include "spotvol/filter.hpp"
#include "spotvol/sde.hpp"

namespace spotvol {

struct SummaryStats {
  double mean = 0.0;
  std::optional<double> std;  // sample std (n-1); absent when n < 2
  long n = 0;
};

/// Mean and sample standard deviation, accumulated in input order.
SummaryStats summarize(std::span<const double> values);

/// Named models:
///   curve-lin / curve-quad / curve-cube / curve-gauss : unit-coefficient
///     models dX = (1 - X)dt + sigma(X)dB with g(x) = x, x^2, x^3, x e^{-x^2},
///     starting at 1 (volatility-curve studies).
///   lin / quad / cube / nlin : interest-rate models starting at 0.1
///     (out-of-sample tables).
ModelSpec model_by_name(std::string_view name);
bool is_known_model(std::string_view name);
/// Default local-linear bandwidth for a named model.
double default_bandwidth(std::string_view name);

/// Protocol for the out-of-sample comparison: per path, burn_obs observations
/// discarded, drift LSE + theta QMLE on the next estimation_len, filter and
/// local-linear evaluated on the last evaluation_len held-out states.  The
/// evaluation filter's init window is the estimation tail ending at the
/// boundary, so held-out states carry no estimation-segment filtering.
struct TableConfig {
  std::string model_name;
  double sample_dt = 1.0 / 16000.0;
  double gen_dt = 1.0 / 320000.0;
  long burn_obs = 2000;
  long estimation_len = 2000;
  long evaluation_len = 2000;
  long init_window_len = 101;
  double bandwidth = 0.0;  // 0 -> model default
  ThetaSearchConfig search;
  double y1_init = 0.0;
  double y_floor = 1e-12;
  std::uint64_t seed = 0;
  long n_paths = 1000;
  int workers = 1;
};

struct TablePathOutcome {
  bool ok = false;
  std::string error;
  double semi_rmse = 0.0;
  double ker_rmse = 0.0;
  double realized = 0.0;
  double v_semi = 0.0;
  double v_ker = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double theta_hat = 0.0;
};

/// One full table path: simulate, estimate, filter, evaluate both methods on
/// the same held-out states.
TablePathOutcome run_table_path(const TableConfig& config,
                                std::uint64_t path_index);

struct TableRow {
  std::string model;
  std::string method;  // "semi" or "ker"
  SummaryStats stats;
  long dropped = 0;
};

struct TablesResult {
  std::vector<TableRow> table1;  // RMSE of spot estimates
  std::vector<TableRow> table2;  // realized minus integrated volatility
};

/// Shared runner: both tables come from the same paths (paired comparison).
/// Throws when more than 5% of a model's paths fail.
TablesResult run_tables(std::span<const TableConfig> configs);
std::vector<TableRow> run_table1(std::span<const TableConfig> configs);
std::vector<TableRow> run_table2(std::span<const TableConfig> configs);

/// Protocol for in-sample volatility-curve recovery: one path per dt, burn-in
/// then a fixed span, the leading fraction of the span reserved for the
/// initial-state estimate.
struct CurveConfig {
  std::string model_name;
  std::vector<double> dt_list = {1.0 / 4000.0, 1.0 / 8000.0, 1.0 / 16000.0};
  double gen_dt = 1.0 / 1.28e6;
  double burn_in_span = 0.5;
  double span = 1.0;
  double init_window_fraction = 1.0 / 40.0;
  double bandwidth = 0.0;  // 0 -> model default
  ThetaSearchConfig search;
  double y1_init = 0.0;
  double y_floor = 1e-12;
  std::uint64_t seed = 0;
  int workers = 1;
  bool with_kernel = true;  // also evaluate the local linear baseline
};

struct CurveRow {
  double x = 0.0;
  double g_true = 0.0;
  double y_semi = 0.0;
  double y_ker = 0.0;  // NaN when the local fit failed or was disabled
};

struct CurveResult {
  double dt = 0.0;
  std::vector<CurveRow> rows;  // sorted by x
  double semi_rmse = 0.0;
  double ker_rmse = 0.0;
  DriftEstimate drift;
  double theta_hat = 0.0;
  long init_window_len = 0;
};

CurveResult run_curve_path(const CurveConfig& config, double dt,
                           std::uint64_t path_index);
/// One path (index 0) per configured dt.
std::vector<CurveResult> run_curves(const CurveConfig& config);

}  // namespace spotvol
