#pragma once

#include <span>
#include <string>

#include "spotvol/experiments.hpp"
#include "spotvol/filter.hpp"
#include "spotvol/sde.hpp"

namespace spotvol {

/// Shortest round-trip "%.{sig}g" rendering.
std::string format_sig(double v, int sig);

/// Path CSV: header "t,x", times t0 + k*dt, 15 significant digits.
void write_path_csv(const std::string& file, const Path& path, double t0 = 0.0);
/// t0_out, when given, receives the first row's time.
Path read_path_csv(const std::string& file, double* t0_out = nullptr);

/// Series CSV: header "t,x,y_filtered".
void write_series_csv(const std::string& file, const EstimateSeries& series,
                      double t0);

/// Spot CSV: header "t,x,y_estimate"; NaN estimates render as empty fields.
void write_spot_csv(const std::string& file, double dt, double t0,
                    std::span<const double> x, std::span<const double> est);

/// Summary CSV: header "model,method,mean,std,n,dropped", 6 significant
/// digits, scientific notation for mean/std; empty std when absent.
void write_table_csv(const std::string& file, std::span<const TableRow> rows);

/// Curve CSV: header "x,g_true,y_semi,y_local_linear", sorted by x.
void write_curve_csv(const std::string& file, const CurveResult& curve);

/// Diagnostics side channel: key=value lines.
void write_key_values(
    const std::string& file,
    std::span<const std::pair<std::string, std::string>> items);

}  // namespace spotvol
