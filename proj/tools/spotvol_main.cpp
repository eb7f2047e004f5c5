// spotvol command line: simulation, filtering, baselines and the experiment
// suites behind one declarative config.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spotvol/baselines.hpp"
#include "spotvol/estimation.hpp"
#include "spotvol/experiments.hpp"
#include "spotvol/filter.hpp"
#include "spotvol/io.hpp"
#include "spotvol/sde.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace spotvol;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KeyInfo {
  const char* name;
  const char* def;  // empty string: required, no default
  const char* doc;
};

// Every recognised config key.  Parsing is strict: a key outside this table
// is an error wherever it appears.
const KeyInfo kRegistry[] = {
    {"model.name", "",
     "model selection: lin, quad, cube, nlin, curve-lin, curve-quad, "
     "curve-cube, curve-gauss, or custom (required; no default)"},
    {"model.drift_alpha", "0", "custom model: drift intercept"},
    {"model.drift_beta", "0", "custom model: drift slope"},
    {"model.diffusion", "power",
     "custom model: diffusion family, power or gauss-damped"},
    {"model.s0", "0", "custom model: power diffusion scale"},
    {"model.rho", "0", "custom model: power diffusion exponent"},
    {"model.x0", "1", "custom model: starting value"},
    {"sim.gen_dt", "3.125e-06", "simulate: data-generating step"},
    {"sim.sample_dt", "6.25e-05", "simulate: observation step"},
    {"sim.burn_in_span", "0.125", "simulate: time discarded up front"},
    {"sim.total_span", "0.25", "simulate: retained time span"},
    {"sim.seed", "", "RNG seed, 64-bit unsigned (required; no default)"},
    {"filter.y1_init", "0", "initial slope state"},
    {"filter.y_floor", "1e-12", "positivity floor for filtered values"},
    {"filter.init_window_len", "101",
     "observations reserved for the initial-state estimate"},
    {"filter.theta", "0",
     "fixed curvature parameter; 0 means estimate by quasi-MLE"},
    {"kernel.bandwidth", "0",
     "local linear bandwidth; 0 means the model's default"},
    {"theta_search.min_abs", "0.0001", "smallest |theta| on the grid"},
    {"theta_search.max_abs", "1000", "largest |theta| on the grid"},
    {"theta_search.grid_points", "41", "signed grid candidates"},
    {"theta_search.refine_iters", "40", "golden-section refinement steps"},
    {"experiment.n_paths", "1000", "tables: Monte Carlo paths per model"},
    {"experiment.models", "lin,quad,cube,nlin", "tables: model list"},
    {"experiment.sample_dt", "6.25e-05", "tables: observation step"},
    {"experiment.gen_dt", "3.125e-06", "tables: data-generating step"},
    {"experiment.burn_obs", "2000", "tables: observations discarded up front"},
    {"experiment.estimation_len", "2000",
     "tables: observations for parameter estimation"},
    {"experiment.evaluation_len", "2000", "tables: held-out observations"},
    {"experiment.dt_list", "0.00025,0.000125,6.25e-05",
     "curves: observation steps"},
    {"experiment.curve_gen_dt", "7.8125e-07", "curves: data-generating step"},
    {"experiment.curve_burn_in", "0.5", "curves: burn-in time span"},
    {"experiment.curve_span", "1", "curves: retained time span"},
    {"experiment.init_window_fraction", "0.025",
     "curves: span fraction reserved for the initial-state estimate"},
    {"experiment.workers", "0", "worker threads; 0 means all hardware threads"},
};

const KeyInfo* registry_find(const std::string& key) {
  for (const auto& info : kRegistry) {
    if (key == info.name) return &info;
  }
  return nullptr;
}

std::string config_reference() {
  std::ostringstream os;
  os << "Config keys (section.key, file format INI-style [section] key=value):\n";
  for (const auto& info : kRegistry) {
    os << "  " << info.name;
    if (*info.def) {
      os << "  (default " << info.def << ")";
    } else {
      os << "  (required)";
    }
    os << "\n      " << info.doc << "\n";
  }
  return os.str();
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

class RunConfig {
 public:
  RunConfig() {
    for (const auto& info : kRegistry) kv_[info.name] = info.def;
  }

  void set(const std::string& key, const std::string& value) {
    if (registry_find(key) == nullptr) {
      throw ConfigError("unknown config key: " + key);
    }
    kv_[key] = value;
  }

  void load_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file);
    std::string line, section;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos || section.empty()) {
        throw ConfigError(file + ":" + std::to_string(lineno) +
                          ": expected [section] or key=value");
      }
      set(section + "." + trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
  }

  void apply_override(const std::string& dotted) {
    const auto eq = dotted.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects section.key=value, got: " + dotted);
    }
    set(trim(dotted.substr(0, eq)), trim(dotted.substr(eq + 1)));
  }

  const std::string& raw(const std::string& key) const {
    return kv_.at(key);
  }

  std::string get_string(const std::string& key) const {
    const std::string& v = kv_.at(key);
    if (v.empty()) throw ConfigError("missing required config key: " + key);
    return v;
  }

  double get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " is not a number: " + v);
    }
  }

  long get_long(const std::string& key) const {
    const double d = get_double(key);
    const long n = std::llround(d);
    if (d != static_cast<double>(n)) {
      throw ConfigError("config key " + key + " is not an integer");
    }
    return n;
  }

  std::uint64_t get_seed() const {
    const std::string v = get_string("sim.seed");
    try {
      std::size_t pos = 0;
      const std::uint64_t s = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return s;
    } catch (const std::exception&) {
      throw ConfigError("sim.seed is not a 64-bit unsigned integer: " + v);
    }
  }

  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(get_string(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (!t.empty()) out.push_back(t);
    }
    if (out.empty()) throw ConfigError("config key " + key + " is empty");
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key)) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("config key " + key + " has a non-number: " + item);
      }
    }
    return out;
  }

  ordered_json to_json() const {
    ordered_json sections;
    for (const auto& info : kRegistry) {
      const std::string key = info.name;
      const auto dot = key.find('.');
      sections[key.substr(0, dot)][key.substr(dot + 1)] = kv_.at(key);
    }
    return sections;
  }

 private:
  std::map<std::string, std::string> kv_;
};

ModelSpec resolve_model(const RunConfig& cfg) {
  const std::string name = cfg.get_string("model.name");
  if (name != "custom") return model_by_name(name);
  ModelSpec model;
  model.drift_alpha = cfg.get_double("model.drift_alpha");
  model.drift_beta = cfg.get_double("model.drift_beta");
  const std::string diff = cfg.get_string("model.diffusion");
  if (diff == "power") {
    model.diffusion = DiffusionKind::kPower;
  } else if (diff == "gauss-damped") {
    model.diffusion = DiffusionKind::kGaussDamped;
  } else {
    throw ConfigError("model.diffusion must be power or gauss-damped");
  }
  model.s0 = cfg.get_double("model.s0");
  model.rho = cfg.get_double("model.rho");
  model.x0 = cfg.get_double("model.x0");
  if (!(model.x0 > 0.0)) throw ConfigError("model.x0 must be positive");
  if (model.s0 < 0.0) throw ConfigError("model.s0 must be >= 0");
  return model;
}

ThetaSearchConfig resolve_search(const RunConfig& cfg) {
  ThetaSearchConfig search;
  search.theta_min_abs = cfg.get_double("theta_search.min_abs");
  search.theta_max_abs = cfg.get_double("theta_search.max_abs");
  search.grid_points = static_cast<int>(cfg.get_long("theta_search.grid_points"));
  search.refine_iters =
      static_cast<int>(cfg.get_long("theta_search.refine_iters"));
  return search;
}

int resolve_workers(const RunConfig& cfg) {
  const long w = cfg.get_long("experiment.workers");
  if (w > 0) return static_cast<int>(w);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void write_manifest(const std::string& file, const std::string& command,
                    const RunConfig& cfg, ordered_json extras) {
  ordered_json m;
  m["command"] = command;
  m["seed"] = cfg.raw("sim.seed");
  m["config"] = cfg.to_json();
  m["results"] = std::move(extras);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << m.dump(2) << '\n';
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_path) {
  const ModelSpec model = resolve_model(cfg);
  SimConfig sim;
  sim.gen_dt = cfg.get_double("sim.gen_dt");
  sim.sample_dt = cfg.get_double("sim.sample_dt");
  sim.burn_in_span = cfg.get_double("sim.burn_in_span");
  sim.total_span = cfg.get_double("sim.total_span");
  sim.seed = cfg.get_seed();
  const Path path = generate_scenario(model, sim, 0);
  write_path_csv(out_path, path, 0.0);
  write_manifest(out_path + ".manifest.json", "simulate", cfg,
                 ordered_json{{"observations", path.values.size()},
                              {"output", out_path}});
  std::cout << "wrote " << path.values.size() << " observations to "
            << out_path << "\n";
  return 0;
}

int cmd_filter(const RunConfig& cfg, const std::string& in_path,
               const std::string& out_path) {
  double t0 = 0.0;
  const Path path = read_path_csv(in_path, &t0);
  const long window = cfg.get_long("filter.init_window_len");
  if (window < 2 || static_cast<long>(path.values.size()) <= window) {
    throw std::invalid_argument(
        "input has " + std::to_string(path.values.size()) +
        " observations; needs more than the init window of " +
        std::to_string(window));
  }

  const DriftEstimate drift = drift_lse(path);
  FilterParams params;
  params.y1_init = cfg.get_double("filter.y1_init");
  params.y_floor = cfg.get_double("filter.y_floor");
  params.alpha_hat = drift.alpha_hat;
  params.beta_hat = drift.beta_hat;
  const double theta_fixed = cfg.get_double("filter.theta");
  params.theta = theta_fixed != 0.0
                     ? theta_fixed
                     : theta_qmle(path, drift, resolve_search(cfg), window,
                                  params);

  const FilterResult fr = run_filter(path, params, window);
  write_series_csv(out_path, fr.series, t0 + window * path.dt);

  const std::vector<std::pair<std::string, std::string>> diag = {
      {"rows", std::to_string(fr.series.rows.size())},
      {"skipped_updates", std::to_string(fr.diagnostics.skipped_updates)},
      {"floor_hits", std::to_string(fr.diagnostics.floor_hits)},
  };
  write_key_values(out_path + ".diag", diag);
  write_manifest(out_path + ".manifest.json", "filter", cfg,
                 ordered_json{{"alpha_hat", drift.alpha_hat},
                              {"beta_hat", drift.beta_hat},
                              {"theta_hat", params.theta},
                              {"rows", fr.series.rows.size()},
                              {"skipped_updates",
                               fr.diagnostics.skipped_updates},
                              {"floor_hits", fr.diagnostics.floor_hits},
                              {"input", in_path},
                              {"output", out_path}});
  std::cout << "alpha_hat=" << format_sig(drift.alpha_hat, 6)
            << " beta_hat=" << format_sig(drift.beta_hat, 6)
            << " theta_hat=" << format_sig(params.theta, 6) << " rows="
            << fr.series.rows.size() << "\n";
  return 0;
}

int cmd_local_linear(const RunConfig& cfg, const std::string& in_path,
                     const std::string& out_path) {
  double t0 = 0.0;
  const Path path = read_path_csv(in_path, &t0);
  double bandwidth = cfg.get_double("kernel.bandwidth");
  if (bandwidth <= 0.0) {
    const std::string name = cfg.raw("model.name");
    if (name.empty() || !is_known_model(name)) {
      throw ConfigError(
          "kernel.bandwidth must be set (no model default available)");
    }
    bandwidth = default_bandwidth(name);
  }
  const std::vector<double> est =
      local_linear_series(path, path.values, KernelConfig{bandwidth});
  write_spot_csv(out_path, path.dt, t0, path.values, est);
  long missing = 0;
  for (const double v : est) {
    if (!std::isfinite(v)) ++missing;
  }
  write_manifest(out_path + ".manifest.json", "local-linear", cfg,
                 ordered_json{{"bandwidth", bandwidth},
                              {"rows", est.size()},
                              {"missing", missing},
                              {"input", in_path},
                              {"output", out_path}});
  std::cout << "wrote " << est.size() << " estimates (" << missing
            << " missing) to " << out_path << "\n";
  return 0;
}

CurveConfig resolve_curves(const RunConfig& cfg) {
  CurveConfig curves;
  curves.model_name = cfg.get_string("model.name");
  if (!is_known_model(curves.model_name)) {
    throw ConfigError("curves need a catalog model name");
  }
  curves.dt_list = cfg.get_double_list("experiment.dt_list");
  curves.gen_dt = cfg.get_double("experiment.curve_gen_dt");
  curves.burn_in_span = cfg.get_double("experiment.curve_burn_in");
  curves.span = cfg.get_double("experiment.curve_span");
  curves.init_window_fraction =
      cfg.get_double("experiment.init_window_fraction");
  curves.bandwidth = cfg.get_double("kernel.bandwidth");
  curves.search = resolve_search(cfg);
  curves.y1_init = cfg.get_double("filter.y1_init");
  curves.y_floor = cfg.get_double("filter.y_floor");
  curves.seed = cfg.get_seed();
  curves.workers = resolve_workers(cfg);
  return curves;
}

int cmd_curves(const RunConfig& cfg, const std::string& out_dir) {
  const CurveConfig curves = resolve_curves(cfg);
  fs::create_directories(out_dir);
  const std::vector<CurveResult> results = run_curves(curves);
  ordered_json files = ordered_json::array();
  for (const auto& res : results) {
    const long inv = std::llround(1.0 / res.dt);
    const std::string file =
        (fs::path(out_dir) / ("curves_dt" + std::to_string(inv) + ".csv"))
            .string();
    write_curve_csv(file, res);
    files.push_back(ordered_json{{"dt", res.dt},
                                 {"file", file},
                                 {"rows", res.rows.size()},
                                 {"init_window_len", res.init_window_len},
                                 {"alpha_hat", res.drift.alpha_hat},
                                 {"beta_hat", res.drift.beta_hat},
                                 {"theta_hat", res.theta_hat},
                                 {"semi_rmse", res.semi_rmse},
                                 {"ker_rmse", res.ker_rmse}});
    std::cout << "dt=" << format_sig(res.dt, 6)
              << " semi_rmse=" << format_sig(res.semi_rmse, 6)
              << " ker_rmse=" << format_sig(res.ker_rmse, 6) << " -> " << file
              << "\n";
  }
  // The init window is counted inside the retained span; the emitted rows
  // cover the remainder.
  write_manifest((fs::path(out_dir) / "manifest.json").string(), "curves", cfg,
                 ordered_json{{"init_window_inside_span", true},
                              {"curves", std::move(files)}});
  return 0;
}

std::vector<TableConfig> resolve_tables(const RunConfig& cfg) {
  std::vector<TableConfig> configs;
  for (const auto& name : cfg.get_list("experiment.models")) {
    if (!is_known_model(name)) {
      throw ConfigError("unknown model in experiment.models: " + name);
    }
    TableConfig tc;
    tc.model_name = name;
    tc.sample_dt = cfg.get_double("experiment.sample_dt");
    tc.gen_dt = cfg.get_double("experiment.gen_dt");
    tc.burn_obs = cfg.get_long("experiment.burn_obs");
    tc.estimation_len = cfg.get_long("experiment.estimation_len");
    tc.evaluation_len = cfg.get_long("experiment.evaluation_len");
    tc.init_window_len = cfg.get_long("filter.init_window_len");
    tc.bandwidth = cfg.get_double("kernel.bandwidth");
    tc.search = resolve_search(cfg);
    tc.y1_init = cfg.get_double("filter.y1_init");
    tc.y_floor = cfg.get_double("filter.y_floor");
    tc.seed = cfg.get_seed();
    tc.n_paths = cfg.get_long("experiment.n_paths");
    tc.workers = resolve_workers(cfg);
    configs.push_back(std::move(tc));
  }
  return configs;
}

int cmd_table(const RunConfig& cfg, const std::string& out_dir, int which) {
  const std::vector<TableConfig> configs = resolve_tables(cfg);
  fs::create_directories(out_dir);
  const std::vector<TableRow> rows =
      which == 1 ? run_table1(configs) : run_table2(configs);
  const std::string name = which == 1 ? "table1.csv" : "table2.csv";
  const std::string file = (fs::path(out_dir) / name).string();
  write_table_csv(file, rows);
  ordered_json dropped;
  for (const auto& row : rows) dropped[row.model] = row.dropped;
  write_manifest((fs::path(out_dir) / "manifest.json").string(),
                 which == 1 ? "table1" : "table2", cfg,
                 ordered_json{{"output", file}, {"dropped", dropped}});
  for (const auto& row : rows) {
    std::cout << row.model << " " << row.method << " mean="
              << format_sig(row.stats.mean, 6);
    if (row.stats.std) std::cout << " std=" << format_sig(*row.stats.std, 6);
    std::cout << " n=" << row.stats.n << " dropped=" << row.dropped << "\n";
  }
  std::cout << "wrote " << file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiparametric spot volatility estimation toolkit"};
  app.require_subcommand(1);

  std::string config_file, out_path, in_path;
  std::vector<std::string> overrides;
  std::string seed_override;
  int workers_override = -1;

  const auto add_common = [&](CLI::App* sub, bool needs_in) {
    sub->add_option("--config", config_file, "INI config file");
    sub->add_option("--set", overrides,
                    "override a config value, section.key=value");
    sub->add_option("--seed", seed_override, "override sim.seed");
    sub->add_option("--out", out_path, "output file or directory")->required();
    sub->add_option("--workers", workers_override,
                    "cap worker threads (overrides experiment.workers)");
    if (needs_in) {
      sub->add_option("--in", in_path, "input path CSV")->required();
    }
    sub->footer(config_reference());
  };

  CLI::App* simulate = app.add_subcommand("simulate", "write a sample path CSV");
  add_common(simulate, false);
  CLI::App* filter = app.add_subcommand(
      "filter", "estimate drift and theta, then filter a path CSV");
  add_common(filter, true);
  CLI::App* locallin = app.add_subcommand(
      "local-linear", "local linear volatility estimates along a path CSV");
  add_common(locallin, true);
  CLI::App* curves = app.add_subcommand(
      "curves", "volatility-curve recovery, one file per observation step");
  add_common(curves, false);
  CLI::App* table1 = app.add_subcommand(
      "table1", "out-of-sample RMSE comparison across models");
  add_common(table1, false);
  CLI::App* table2 = app.add_subcommand(
      "table2", "realized minus integrated volatility across models");
  add_common(table2, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& o : overrides) cfg.apply_override(o);
    if (!seed_override.empty()) cfg.set("sim.seed", seed_override);
    if (workers_override >= 0) {
      cfg.set("experiment.workers", std::to_string(workers_override));
    }

    if (simulate->parsed()) return cmd_simulate(cfg, out_path);
    if (filter->parsed()) return cmd_filter(cfg, in_path, out_path);
    if (locallin->parsed()) return cmd_local_linear(cfg, in_path, out_path);
    if (curves->parsed()) return cmd_curves(cfg, out_path);
    if (table1->parsed()) return cmd_table(cfg, out_path, 1);
    if (table2->parsed()) return cmd_table(cfg, out_path, 2);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
