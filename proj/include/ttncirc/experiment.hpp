// SPDX-License-Identifier: Apache-2.0
//
// Batch experiment driver: a key=value configuration format with named
// presets, target/topology construction, and a (method, K, learning-rate)
// cell grid whose results land in results.csv, manifest.json, and per-cell
// trace/circuit files.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ttncirc/errors.hpp"
#include "ttncirc/network.hpp"
#include "ttncirc/optimize.hpp"
#include "ttncirc/serialize.hpp"
#include "ttncirc/states.hpp"
#include "ttncirc/tensor.hpp"
#include "ttncirc/topology.hpp"

namespace ttncirc {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kManifestFormat = "ttncirc-manifest-v1";

/// One experiment run: a target state, a tree topology, a bond dimension for
/// the reference network, and the grid of embedding cells to evaluate.
/// `target` is one of bas | heisenberg | fixture; `topology` is one of
/// balanced-tree | mps-caterpillar | lattice | custom (custom reads
/// `topology_file`). `chi_cap` 0 lets absorptions reuse the network's bond.
struct ExperimentConfig {
  std::string target = "bas";
  std::size_t rows = 4;
  std::size_t cols = 4;
  Boundary boundary = Boundary::Open;
  double j1 = 1.0;
  double j2 = 0.5;
  std::string fixture;
  std::string topology = "balanced-tree";
  std::string topology_file;
  std::size_t chi = 8;
  std::vector<EmbedMethod> methods{EmbedMethod::IterD, EmbedMethod::DAll};
  std::size_t k_max = 5;
  std::size_t sweeps = 100;
  std::vector<double> learning_rates{0.65};
  std::size_t chi_cap = 0;
  double rel_tol = 1e-12;
  double convergence_tol = 1e-12;
  unsigned seed = 7;
  std::string output = "out";
};

/// Named presets. The desk presets run in minutes; the full presets use the
/// long sweep schedule and the whole learning-rate grid and run much longer.
inline ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.methods = {EmbedMethod::DAll, EmbedMethod::OAll, EmbedMethod::IterI, EmbedMethod::IterD};
  if (name == "desk-bas") {
    cfg.learning_rates = {0.65};
  } else if (name == "desk-heisenberg") {
    cfg.target = "heisenberg";
    cfg.learning_rates = {0.6};
  } else if (name == "desk-bas-chi16") {
    cfg.chi = 16;
    cfg.k_max = 4;
    cfg.methods = {EmbedMethod::IterI, EmbedMethod::IterD};
    cfg.learning_rates = {0.65};
  } else if (name == "full-bas" || name == "full-heisenberg") {
    if (name == "full-heisenberg") cfg.target = "heisenberg";
    cfg.k_max = 7;
    cfg.sweeps = 1000;
    cfg.learning_rates = {0.5, 0.55, 0.6, 0.65, 0.7};
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return cfg;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string item =
        trim(comma == std::string::npos ? value.substr(start) : value.substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::size_t parse_size(const std::string& value, const std::string& field) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config field '" + field + "': '" + value + "' is not a non-negative integer");
  }
}

inline double parse_real(const std::string& value, const std::string& field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + field + "': '" + value + "' is not a number");
  }
}

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  if (key == "target") {
    if (value != "bas" && value != "heisenberg" && value != "fixture")
      throw ConfigError("config field 'target': must be bas, heisenberg, or fixture");
    cfg.target = value;
  } else if (key == "rows") {
    cfg.rows = parse_size(value, key);
  } else if (key == "cols") {
    cfg.cols = parse_size(value, key);
  } else if (key == "boundary") {
    cfg.boundary = parse_boundary(value);
  } else if (key == "j1") {
    cfg.j1 = parse_real(value, key);
  } else if (key == "j2") {
    cfg.j2 = parse_real(value, key);
  } else if (key == "fixture") {
    cfg.fixture = value;
  } else if (key == "topology") {
    if (value != "balanced-tree" && value != "mps-caterpillar" && value != "lattice" &&
        value != "custom")
      throw ConfigError(
          "config field 'topology': must be balanced-tree, mps-caterpillar, lattice, or custom");
    cfg.topology = value;
  } else if (key == "topology_file") {
    cfg.topology_file = value;
  } else if (key == "chi") {
    cfg.chi = parse_size(value, key);
  } else if (key == "methods") {
    cfg.methods.clear();
    for (const std::string& item : split_list(value)) cfg.methods.push_back(parse_embed_method(item));
  } else if (key == "k_max") {
    cfg.k_max = parse_size(value, key);
  } else if (key == "sweeps") {
    cfg.sweeps = parse_size(value, key);
  } else if (key == "learning_rates") {
    cfg.learning_rates.clear();
    for (const std::string& item : split_list(value))
      cfg.learning_rates.push_back(parse_real(item, key));
  } else if (key == "chi_cap") {
    cfg.chi_cap = parse_size(value, key);
  } else if (key == "rel_tol") {
    cfg.rel_tol = parse_real(value, key);
  } else if (key == "convergence_tol") {
    cfg.convergence_tol = parse_real(value, key);
  } else if (key == "seed") {
    cfg.seed = static_cast<unsigned>(parse_size(value, key));
  } else if (key == "output") {
    cfg.output = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline std::string format_real(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace detail

inline void validate_experiment_config(const ExperimentConfig& cfg) {
  if (cfg.target != "bas" && cfg.target != "heisenberg" && cfg.target != "fixture")
    throw ConfigError("config field 'target': must be bas, heisenberg, or fixture");
  if (cfg.target != "fixture") {
    const std::size_t sites = cfg.rows * cfg.cols;
    if (sites < 2 || sites > 24)
      throw ConfigError("config fields 'rows'/'cols': site count must lie in [2, 24]");
  }
  if (cfg.target == "fixture" && cfg.fixture.empty())
    throw ConfigError("config field 'fixture': required when target = fixture");
  if (cfg.topology == "custom" && cfg.topology_file.empty())
    throw ConfigError("config field 'topology_file': required when topology = custom");
  if (cfg.chi < 1) throw ConfigError("config field 'chi': must be >= 1");
  if (cfg.methods.empty()) throw ConfigError("config field 'methods': at least one method");
  if (cfg.k_max < 1) throw ConfigError("config field 'k_max': must be >= 1");
  if (cfg.sweeps < 1) throw ConfigError("config field 'sweeps': must be >= 1");
  if (cfg.learning_rates.empty())
    throw ConfigError("config field 'learning_rates': at least one rate");
  for (double r : cfg.learning_rates)
    if (!(r >= 0.0 && r <= 1.0))
      throw ConfigError("config field 'learning_rates': rates must lie in [0, 1]");
  if (!(cfg.rel_tol >= 0.0)) throw ConfigError("config field 'rel_tol': must be >= 0");
  if (cfg.output.empty()) throw ConfigError("config field 'output': must not be empty");
}

/// Parses the key=value config format: one `key = value` per line, blank
/// lines and #-comments ignored. A `preset = name` line replaces the whole
/// config with that preset, so overrides must come after it.
inline ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  std::size_t line_start = 0, line_no = 0;
  while (line_start <= text.size()) {
    const std::size_t nl = text.find('\n', line_start);
    std::string line =
        nl == std::string::npos ? text.substr(line_start) : text.substr(line_start, nl - line_start);
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (!line.empty()) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key == "preset")
        cfg = preset_config(value);
      else
        detail::apply_config_entry(cfg, key, value);
    }
    if (nl == std::string::npos) break;
    line_start = nl + 1;
  }
  validate_experiment_config(cfg);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_experiment_config(text);
}

inline Json config_to_json(const ExperimentConfig& cfg) {
  Json methods = Json::array();
  for (EmbedMethod m : cfg.methods) methods.push_back(embed_method_name(m));
  Json doc;
  doc["target"] = cfg.target;
  doc["rows"] = cfg.rows;
  doc["cols"] = cfg.cols;
  doc["boundary"] = boundary_name(cfg.boundary);
  doc["j1"] = cfg.j1;
  doc["j2"] = cfg.j2;
  doc["fixture"] = cfg.fixture;
  doc["topology"] = cfg.topology;
  doc["topology_file"] = cfg.topology_file;
  doc["chi"] = cfg.chi;
  doc["methods"] = methods;
  doc["k_max"] = cfg.k_max;
  doc["sweeps"] = cfg.sweeps;
  doc["learning_rates"] = cfg.learning_rates;
  doc["chi_cap"] = cfg.chi_cap;
  doc["rel_tol"] = cfg.rel_tol;
  doc["convergence_tol"] = cfg.convergence_tol;
  doc["seed"] = cfg.seed;
  doc["output"] = cfg.output;
  return doc;
}

struct TargetInfo {
  StateVector psi;
  Json details = Json::object();
};

/// Builds the configured target state; `details` records how it was built
/// (pattern count, ground-state energy/residual, fixture normalization) so
/// the run manifest can reproduce it.
inline TargetInfo build_target(const ExperimentConfig& cfg) {
  TargetInfo info;
  if (cfg.target == "bas") {
    info.psi = bas_state(cfg.rows, cfg.cols);
    info.details["pattern_count"] =
        (std::size_t{1} << cfg.rows) + (std::size_t{1} << cfg.cols) - 2;
  } else if (cfg.target == "heisenberg") {
    LatticeSpec spec;
    spec.rows = cfg.rows;
    spec.cols = cfg.cols;
    spec.boundary = cfg.boundary;
    spec.j1 = cfg.j1;
    spec.j2 = cfg.j2;
    GroundStateOptions opt;
    opt.seed = cfg.seed;
    const GroundStateResult gs = ground_state(heisenberg_hamiltonian(spec), opt);
    info.psi = gs.psi;
    info.details["energy"] = gs.energy;
    info.details["residual"] = gs.residual;
    info.details["degenerate"] = gs.degenerate;
    info.details["lanczos_iterations"] = gs.iterations;
  } else {
    info.psi = load_state(cfg.fixture);
    double norm2 = 0.0;
    for (const Complex& z : info.psi) norm2 += std::norm(z);
    if (norm2 <= 0.0) throw ConfigError("fixture state has zero norm");
    const double scale = 1.0 / std::sqrt(norm2);
    for (Complex& z : info.psi) z *= scale;
    info.details["normalized_from"] = std::sqrt(norm2);
  }
  return info;
}

inline TreeTopology build_topology(const ExperimentConfig& cfg, std::size_t qubit_count) {
  try {
    if (cfg.topology == "balanced-tree") return TreeTopology::balanced(qubit_count);
    if (cfg.topology == "mps-caterpillar") return TreeTopology::caterpillar(qubit_count);
    if (cfg.topology == "lattice") {
      if (cfg.rows * cfg.cols != qubit_count)
        throw ConfigError("config field 'topology': lattice needs rows*cols == qubit count");
      return TreeTopology::lattice(cfg.rows, cfg.cols);
    }
    const TreeTopology topo = topology_from_json(read_json_file(cfg.topology_file));
    if (topo.qubit_count() != qubit_count)
      throw ConfigError("config field 'topology_file': topology has " +
                        std::to_string(topo.qubit_count()) + " qubits but the target has " +
                        std::to_string(qubit_count));
    return topo;
  } catch (const PreconditionError& e) {
    throw ConfigError("config field 'topology': " + std::string(e.what()));
  }
}

struct CellOutcome {
  EmbedMethod method = EmbedMethod::DAll;
  std::size_t layer_count = 0;
  double learning_rate = 1.0;
  std::size_t r_index = 0;  // 1-based position in config.learning_rates
  bool ok = false;
  std::string message;
  double infidelity = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  bool selected = false;
  std::string trace_file;
  std::string circuit_file;
};

struct ExperimentResult {
  std::string output_dir;
  std::size_t qubit_count = 0;
  double ttn_infidelity = 0.0;
  std::vector<CellOutcome> cells;
  std::string results_csv;
  Json manifest;
};

/// Runs every (method, K <= k_max, learning rate) cell against the target's
/// chi-truncated network and writes results.csv, manifest.json, and per-cell
/// trace/circuit files under cfg.output. Cell failures are recorded and the
/// run continues; per (method, K) the best-accuracy learning rate is marked
/// selected. results.csv carries no wall-clock columns, so reruns with the
/// same config and seed produce identical bytes.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);
  const detail::EmbedClock clock;
  const TargetInfo target = build_target(cfg);
  std::size_t n = 0;
  while ((std::size_t{1} << n) < target.psi.size()) ++n;
  if ((std::size_t{1} << n) != target.psi.size() || n < 2)
    throw ConfigError("target state length must be 2^n with n >= 2");
  const TreeTopology topo = build_topology(cfg, n);
  double ttn_infidelity = 0.0;
  const TreeTensorNetwork psi0 = from_statevector(target.psi, topo, cfg.chi, &ttn_infidelity);

  const std::filesystem::path dir(cfg.output);
  std::filesystem::create_directories(dir);

  ExperimentResult result;
  result.output_dir = dir.string();
  result.qubit_count = n;
  result.ttn_infidelity = ttn_infidelity;

  SweepConfig sweep_cfg;
  sweep_cfg.sweeps = cfg.sweeps;
  sweep_cfg.convergence_tol = cfg.convergence_tol;

  for (EmbedMethod method : cfg.methods)
    for (std::size_t k = 1; k <= cfg.k_max; ++k)
      for (std::size_t ri = 0; ri < cfg.learning_rates.size(); ++ri) {
        CellOutcome cell;
        cell.method = method;
        cell.layer_count = k;
        cell.learning_rate = cfg.learning_rates[ri];
        cell.r_index = ri + 1;
        const std::string stem = embed_method_name(method) + "_K" + std::to_string(k) + "_r" +
                                 std::to_string(cell.r_index);
        try {
          sweep_cfg.learning_rate = cell.learning_rate;
          const EmbedReport report = embed(psi0, method, k, sweep_cfg, cfg.chi_cap, cfg.rel_tol);
          cell.ok = true;
          cell.infidelity = report.final_infidelity;
          cell.seconds = report.total_seconds;
          cell.trace_file = "trace_" + stem + ".csv";
          cell.circuit_file = "circuit_" + stem + ".json";
          write_text_file((dir / cell.trace_file).string(), report_to_csv(report));
          write_json_file((dir / cell.circuit_file).string(), circuit_to_json(report.circuit));
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.message = e.what();
        }
        result.cells.push_back(std::move(cell));
      }

  // Per (method, K) the learning rate with the lowest final infidelity wins;
  // earlier rates win ties so the record is deterministic.
  for (EmbedMethod method : cfg.methods)
    for (std::size_t k = 1; k <= cfg.k_max; ++k) {
      CellOutcome* best = nullptr;
      for (CellOutcome& cell : result.cells)
        if (cell.method == method && cell.layer_count == k && cell.ok &&
            (best == nullptr || cell.infidelity < best->infidelity))
          best = &cell;
      if (best != nullptr) best->selected = true;
    }

  std::string csv = "method,K,r,infidelity,selected,status\n";
  for (const CellOutcome& cell : result.cells) {
    csv += embed_method_name(cell.method);
    csv += ',' + std::to_string(cell.layer_count);
    csv += ',' + detail::format_real("%g", cell.learning_rate);
    csv += ',';
    csv += cell.ok ? detail::format_real("%.12e", cell.infidelity) : "nan";
    csv += ',' + std::to_string(cell.selected ? 1 : 0);
    csv += ',';
    csv += cell.ok ? "ok" : "failed";
    csv += '\n';
  }
  result.results_csv = csv;

  Json cells = Json::array();
  for (const CellOutcome& cell : result.cells) {
    Json entry;
    entry["method"] = embed_method_name(cell.method);
    entry["K"] = cell.layer_count;
    entry["learning_rate"] = cell.learning_rate;
    entry["r_index"] = cell.r_index;
    entry["status"] = cell.ok ? "ok" : "failed";
    if (cell.ok) {
      entry["infidelity"] = cell.infidelity;
      entry["seconds"] = cell.seconds;
      entry["selected"] = cell.selected;
      entry["trace"] = cell.trace_file;
      entry["circuit"] = cell.circuit_file;
    } else {
      entry["message"] = cell.message;
    }
    cells.push_back(std::move(entry));
  }
  Json selection = Json::array();
  for (const CellOutcome& cell : result.cells)
    if (cell.selected) {
      Json entry;
      entry["method"] = embed_method_name(cell.method);
      entry["K"] = cell.layer_count;
      entry["learning_rate"] = cell.learning_rate;
      selection.push_back(std::move(entry));
    }

  Json manifest;
  manifest["format"] = kManifestFormat;
  manifest["tool"] = {{"name", "ttncirc"}, {"version", kToolVersion}};
  manifest["versions"] = {
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  manifest["config"] = config_to_json(cfg);
  manifest["seed"] = cfg.seed;
  manifest["qubit_count"] = n;
  manifest["target"] = target.details;
  manifest["ttn_infidelity"] = ttn_infidelity;
  manifest["ttn_max_bond"] = psi0.max_virtual_bond();
  manifest["cells"] = std::move(cells);
  manifest["selection"] = std::move(selection);
  manifest["total_seconds"] = clock.seconds();
  result.manifest = manifest;

  write_text_file((dir / "results.csv").string(), csv);
  write_json_file((dir / "manifest.json").string(), manifest);
  return result;
}

}  // namespace ttncirc
