// SPDX-License-Identifier: Apache-2.0
//
// JSON and binary serialization: state vectors, tree topologies, tree tensor
// networks, layered circuits, and embedding reports. Every JSON document
// carries a "format" tag; complex numbers are [re, im] pairs; basis-state
// indices put qubit 0 in the most significant bit.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ttncirc/circuit.hpp"
#include "ttncirc/errors.hpp"
#include "ttncirc/network.hpp"
#include "ttncirc/optimize.hpp"
#include "ttncirc/tensor.hpp"
#include "ttncirc/topology.hpp"

namespace ttncirc {

using Json = nlohmann::json;

inline constexpr const char* kStateFormat = "ttncirc-state-v1";
inline constexpr const char* kTopologyFormat = "ttncirc-topology-v1";
inline constexpr const char* kTtnFormat = "ttncirc-ttn-v1";
inline constexpr const char* kCircuitFormat = "ttncirc-circuit-v1";
inline constexpr const char* kReportFormat = "ttncirc-report-v1";

namespace detail {

inline void require_format(const Json& doc, const char* format) {
  if (!doc.is_object() || !doc.contains("format") || !doc["format"].is_string())
    throw ConfigError("document lacks a \"format\" tag");
  const std::string got = doc["format"].get<std::string>();
  if (got != format)
    throw ConfigError("expected format " + std::string(format) + ", found " + got);
}

inline Json complex_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Complex json_complex(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("complex entries must be [re, im] number pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Json values_json(const std::vector<Complex>& values) {
  Json out = Json::array();
  for (const Complex& z : values) out.push_back(complex_json(z));
  return out;
}

inline std::vector<Complex> json_values(const Json& j, std::size_t expected) {
  if (!j.is_array() || j.size() != expected)
    throw ConfigError("expected " + std::to_string(expected) + " complex entries, found " +
                      std::to_string(j.is_array() ? j.size() : 0));
  std::vector<Complex> out;
  out.reserve(expected);
  for (const Json& e : j) out.push_back(json_complex(e));
  return out;
}

inline std::size_t json_index(const Json& j, const char* what) {
  if (!j.is_number_unsigned())
    throw ConfigError(std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// State vectors

inline Json state_to_json(const StateVector& psi) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < psi.size()) ++n;
  if ((std::size_t{1} << n) != psi.size())
    throw ShapeError("state_to_json: length is not a power of two");
  Json doc;
  doc["format"] = kStateFormat;
  doc["qubit_count"] = n;
  doc["amplitudes"] = detail::values_json(psi);
  return doc;
}

inline StateVector state_from_json(const Json& doc) {
  detail::require_format(doc, kStateFormat);
  if (!doc.contains("qubit_count") || !doc.contains("amplitudes"))
    throw ConfigError("state document needs qubit_count and amplitudes");
  const std::size_t n = detail::json_index(doc["qubit_count"], "qubit_count");
  if (n > 24) throw ConfigError("state exceeds the 24-qubit bound");
  return detail::json_values(doc["amplitudes"], std::size_t{1} << n);
}

/// Binary layout: uint64 little-endian amplitude count, then count pairs of
/// float64 little-endian (re, im).
inline void write_state_binary(std::ostream& out, const StateVector& psi) {
  const std::uint64_t len = psi.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  for (const Complex& z : psi) {
    const double re = z.real(), im = z.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(re));
    out.write(reinterpret_cast<const char*>(&im), sizeof(im));
  }
  if (!out) throw ConfigError("failed to write binary state");
}

inline StateVector read_state_binary(std::istream& in) {
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len == 0 || len > (std::uint64_t{1} << 24) || (len & (len - 1)) != 0)
    throw ConfigError("binary state has an invalid length header");
  StateVector psi(static_cast<std::size_t>(len));
  for (Complex& z : psi) {
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), sizeof(re));
    in.read(reinterpret_cast<char*>(&im), sizeof(im));
    z = Complex(re, im);
  }
  if (!in) throw ConfigError("binary state is truncated");
  return psi;
}

// ---------------------------------------------------------------------------
// Topologies

inline Json topology_to_json(const TreeTopology& topo) {
  const std::size_t n = topo.qubit_count();
  Json children = Json::array();
  for (std::size_t i = 1; i <= n - 1; ++i)
    children.push_back(Json::array({topo.left(i), topo.right(i)}));
  Json leaf_qubit = Json::array();
  for (std::size_t id = n; id <= 2 * n - 1; ++id) leaf_qubit.push_back(topo.leaf_qubit(id));
  Json doc;
  doc["format"] = kTopologyFormat;
  doc["qubit_count"] = n;
  doc["children"] = children;
  doc["leaf_qubit"] = leaf_qubit;
  return doc;
}

inline TreeTopology topology_from_json(const Json& doc) {
  detail::require_format(doc, kTopologyFormat);
  if (!doc.contains("qubit_count") || !doc.contains("children") || !doc.contains("leaf_qubit"))
    throw ConfigError("topology document needs qubit_count, children, and leaf_qubit");
  const std::size_t n = detail::json_index(doc["qubit_count"], "qubit_count");
  if (n < 2 || n > 24) throw ConfigError("topology qubit_count must lie in [2, 24]");
  const Json& children = doc["children"];
  const Json& leaves = doc["leaf_qubit"];
  if (!children.is_array() || children.size() != n - 1)
    throw ConfigError("topology needs exactly qubit_count - 1 children pairs");
  if (!leaves.is_array() || leaves.size() != n)
    throw ConfigError("topology needs exactly qubit_count leaf_qubit entries");
  std::vector<std::size_t> parent(2 * n, TreeTopology::kNone), left(2 * n, TreeTopology::kNone),
      right(2 * n, TreeTopology::kNone), leaf_qubit(n);
  for (std::size_t i = 1; i <= n - 1; ++i) {
    const Json& pair = children[i - 1];
    if (!pair.is_array() || pair.size() != 2)
      throw ConfigError("children entries must be [left, right] id pairs");
    left[i] = detail::json_index(pair[0], "child id");
    right[i] = detail::json_index(pair[1], "child id");
    for (std::size_t c : {left[i], right[i]}) {
      if (c < 2 || c > 2 * n - 1) throw ConfigError("child id out of range");
      parent[c] = i;
    }
  }
  for (std::size_t j = 0; j < n; ++j) leaf_qubit[j] = detail::json_index(leaves[j], "leaf qubit");
  try {
    return TreeTopology(n, std::move(parent), std::move(left), std::move(right),
                        std::move(leaf_qubit));
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("invalid topology: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Tree tensor networks

inline Json ttn_to_json(const TreeTensorNetwork& net) {
  Json tensors = Json::array();
  for (std::size_t i = 1; i <= net.topology.internal_count(); ++i) {
    const Tensor& t = net.tensors[i];
    Json entry;
    entry["node"] = i;
    entry["shape"] = t.shape();
    entry["data"] = detail::values_json(t.values());
    tensors.push_back(std::move(entry));
  }
  Json doc;
  doc["format"] = kTtnFormat;
  doc["topology"] = topology_to_json(net.topology);
  doc["canonical_center"] = net.canonical_center;
  doc["tensors"] = tensors;
  return doc;
}

inline TreeTensorNetwork ttn_from_json(const Json& doc) {
  detail::require_format(doc, kTtnFormat);
  if (!doc.contains("topology") || !doc.contains("canonical_center") || !doc.contains("tensors"))
    throw ConfigError("ttn document needs topology, canonical_center, and tensors");
  TreeTensorNetwork net{topology_from_json(doc["topology"]), {}, 1};
  const std::size_t n = net.topology.qubit_count();
  net.canonical_center = detail::json_index(doc["canonical_center"], "canonical_center");
  const Json& tensors = doc["tensors"];
  if (!tensors.is_array() || tensors.size() != n - 1)
    throw ConfigError("ttn needs exactly qubit_count - 1 tensors");
  net.tensors.assign(n, Tensor());
  for (const Json& entry : tensors) {
    if (!entry.is_object() || !entry.contains("node") || !entry.contains("shape") ||
        !entry.contains("data"))
      throw ConfigError("ttn tensor entries need node, shape, and data");
    const std::size_t id = detail::json_index(entry["node"], "node");
    if (id < 1 || id > n - 1) throw ConfigError("ttn tensor node id out of range");
    const Json& shape_json = entry["shape"];
    if (!shape_json.is_array() || shape_json.size() != 3)
      throw ConfigError("ttn tensors must be rank 3");
    std::vector<std::size_t> shape;
    for (const Json& d : shape_json) shape.push_back(detail::json_index(d, "dimension"));
    Tensor t(shape);
    t.values() = detail::json_values(entry["data"], t.size());
    net.tensors[id] = std::move(t);
  }
  try {
    net.check_structure();
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("invalid ttn: ") + e.what());
  }
  return net;
}

// ---------------------------------------------------------------------------
// Circuits

inline Json circuit_to_json(const LayeredCircuit& circuit) {
  Json gates = Json::array();
  for (std::size_t k = 0; k < circuit.layers.size(); ++k)
    for (const Gate& g : circuit.layers[k].gates) {
      Json entry;
      entry["layer"] = k;
      entry["node_id"] = g.node_id;
      entry["qubits"] = Json::array({g.qubit_a, g.qubit_b});
      Json rows = Json::array();
      for (std::size_t r = 0; r < 4; ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < 4; ++c) row.push_back(detail::complex_json(g.unitary.at({r, c})));
        rows.push_back(std::move(row));
      }
      entry["unitary"] = std::move(rows);
      gates.push_back(std::move(entry));
    }
  Json doc;
  doc["format"] = kCircuitFormat;
  doc["qubit_count"] = circuit.qubit_count;
  doc["layer_count"] = circuit.layers.size();
  doc["gates"] = gates;
  return doc;
}

inline LayeredCircuit circuit_from_json(const Json& doc) {
  detail::require_format(doc, kCircuitFormat);
  if (!doc.contains("qubit_count") || !doc.contains("layer_count") || !doc.contains("gates"))
    throw ConfigError("circuit document needs qubit_count, layer_count, and gates");
  LayeredCircuit circuit;
  circuit.qubit_count = detail::json_index(doc["qubit_count"], "qubit_count");
  if (circuit.qubit_count < 2 || circuit.qubit_count > 24)
    throw ConfigError("circuit qubit_count must lie in [2, 24]");
  const std::size_t layer_count = detail::json_index(doc["layer_count"], "layer_count");
  circuit.layers.resize(layer_count);
  if (!doc["gates"].is_array()) throw ConfigError("circuit gates must be an array");
  for (const Json& entry : doc["gates"]) {
    if (!entry.is_object() || !entry.contains("layer") || !entry.contains("node_id") ||
        !entry.contains("qubits") || !entry.contains("unitary"))
      throw ConfigError("circuit gates need layer, node_id, qubits, and unitary");
    const std::size_t k = detail::json_index(entry["layer"], "layer");
    if (k >= layer_count) throw ConfigError("gate layer index out of range");
    const Json& qubits = entry["qubits"];
    if (!qubits.is_array() || qubits.size() != 2)
      throw ConfigError("gate qubits must be a [qubit_a, qubit_b] pair");
    Gate g;
    g.node_id = detail::json_index(entry["node_id"], "node_id");
    g.qubit_a = detail::json_index(qubits[0], "qubit");
    g.qubit_b = detail::json_index(qubits[1], "qubit");
    const Json& rows = entry["unitary"];
    if (!rows.is_array() || rows.size() != 4) throw ConfigError("gate unitary must be 4x4");
    g.unitary = Tensor({4, 4});
    for (std::size_t r = 0; r < 4; ++r) {
      if (!rows[r].is_array() || rows[r].size() != 4)
        throw ConfigError("gate unitary must be 4x4");
      for (std::size_t c = 0; c < 4; ++c) g.unitary.at({r, c}) = detail::json_complex(rows[r][c]);
    }
    circuit.layers[k].gates.push_back(std::move(g));
  }
  try {
    for (const GateLayer& layer : circuit.layers) layer.validate(circuit.qubit_count);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid circuit: ") + e.what());
  }
  return circuit;
}

// ---------------------------------------------------------------------------
// Embedding reports

inline Json report_to_json(const EmbedReport& report) {
  Json rows = Json::array();
  for (const EmbedRow& row : report.rows) {
    Json entry;
    entry["K"] = row.layer_count;
    entry["sweep"] = row.sweep;
    entry["infidelity"] = row.infidelity;
    entry["seconds"] = row.seconds;
    rows.push_back(std::move(entry));
  }
  Json doc;
  doc["format"] = kReportFormat;
  doc["method"] = embed_method_name(report.method);
  doc["qubit_count"] = report.qubit_count;
  doc["layer_count"] = report.layer_count;
  doc["sweeps"] = report.config.sweeps;
  doc["learning_rate"] = report.config.learning_rate;
  doc["convergence_tol"] = report.config.convergence_tol;
  doc["chi_cap"] = report.chi_cap;
  doc["rel_tol"] = report.rel_tol;
  doc["final_infidelity"] = report.final_infidelity;
  doc["total_seconds"] = report.total_seconds;
  doc["rows"] = rows;
  return doc;
}

/// Flat per-cell trace; one row per (K, sweep) point, sweep 0 meaning "right
/// after the layer was added, before any optimization".
inline std::string report_to_csv(const EmbedReport& report) {
  std::string out = "method,K,sweep,infidelity,seconds\n";
  const std::string method = embed_method_name(report.method);
  char line[160];
  for (const EmbedRow& row : report.rows) {
    std::snprintf(line, sizeof(line), "%s,%zu,%zu,%.12e,%.6f\n", method.c_str(),
                  row.layer_count, row.sweep, row.infidelity, row.seconds);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// File helpers

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw ConfigError("failed to write " + path);
}

inline void write_json_file(const std::string& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Writes JSON for *.json paths and the binary layout otherwise.
inline void save_state(const std::string& path, const StateVector& psi) {
  if (has_suffix(path, ".json")) {
    write_json_file(path, state_to_json(psi));
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_state_binary(out, psi);
}

inline StateVector load_state(const std::string& path) {
  if (has_suffix(path, ".json")) return state_from_json(read_json_file(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_state_binary(in);
}

}  // namespace ttncirc
