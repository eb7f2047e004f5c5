#include "spotvol/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spotvol {

namespace {

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  return out;
}

std::string format_sci(double v, int sig) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*e", sig - 1, v);
  return buf;
}

}  // namespace

std::string format_sig(double v, int sig) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
  return buf;
}

void write_path_csv(const std::string& file, const Path& path, double t0) {
  auto out = open_out(file);
  out << "t,x\n";
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    out << format_sig(t0 + static_cast<double>(k) * path.dt, 15) << ','
        << format_sig(path.values[k], 15) << '\n';
  }
}

Path read_path_csv(const std::string& file, double* t0_out) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open for reading: " + file);
  std::string line;
  if (!std::getline(in, line) || (line != "t,x" && line != "t,x\r")) {
    throw std::runtime_error("bad path CSV header in " + file);
  }
  std::vector<double> times, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("bad path CSV row in " + file);
    }
    times.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (values.size() < 2) {
    throw std::runtime_error("path CSV needs at least 2 rows: " + file);
  }
  Path path;
  path.dt = times[1] - times[0];
  if (!(path.dt > 0.0)) {
    throw std::runtime_error("path CSV times must increase: " + file);
  }
  if (t0_out != nullptr) *t0_out = times[0];
  path.values = std::move(values);
  return path;
}

void write_series_csv(const std::string& file, const EstimateSeries& series,
                      double t0) {
  auto out = open_out(file);
  out << "t,x,y_filtered\n";
  for (std::size_t k = 0; k < series.rows.size(); ++k) {
    out << format_sig(t0 + static_cast<double>(k) * series.dt, 15) << ','
        << format_sig(series.rows[k].x, 15) << ','
        << format_sig(series.rows[k].y_filtered, 15) << '\n';
  }
}

void write_spot_csv(const std::string& file, double dt, double t0,
                    std::span<const double> x, std::span<const double> est) {
  if (x.size() != est.size()) {
    throw std::invalid_argument("spot CSV needs aligned sequences");
  }
  auto out = open_out(file);
  out << "t,x,y_estimate\n";
  for (std::size_t k = 0; k < x.size(); ++k) {
    out << format_sig(t0 + static_cast<double>(k) * dt, 15) << ','
        << format_sig(x[k], 15) << ',';
    if (std::isfinite(est[k])) out << format_sig(est[k], 15);
    out << '\n';
  }
}

void write_table_csv(const std::string& file, std::span<const TableRow> rows) {
  auto out = open_out(file);
  out << "model,method,mean,std,n,dropped\n";
  for (const auto& row : rows) {
    out << row.model << ',' << row.method << ','
        << format_sci(row.stats.mean, 6) << ',';
    if (row.stats.std) out << format_sci(*row.stats.std, 6);
    out << ',' << row.stats.n << ',' << row.dropped << '\n';
  }
}

void write_curve_csv(const std::string& file, const CurveResult& curve) {
  auto out = open_out(file);
  out << "x,g_true,y_semi,y_local_linear\n";
  for (const auto& row : curve.rows) {
    out << format_sig(row.x, 15) << ',' << format_sig(row.g_true, 15) << ','
        << format_sig(row.y_semi, 15) << ',';
    if (std::isfinite(row.y_ker)) out << format_sig(row.y_ker, 15);
    out << '\n';
  }
}

void write_key_values(
    const std::string& file,
    std::span<const std::pair<std::string, std::string>> items) {
  auto out = open_out(file);
  for (const auto& [key, value] : items) out << key << '=' << value << '\n';
}

}  // namespace spotvol
