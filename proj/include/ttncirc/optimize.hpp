// SPDX-License-Identifier: Apache-2.0
//
// Environment-tensor sweep optimization of a layered circuit against a target
// state, the SVD gate update with learning rate, and the four embedding
// strategies built on top of it (D_all, O_all, Iter_I, Iter_D).
#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ttncirc/circuit.hpp"
#include "ttncirc/decompose.hpp"
#include "ttncirc/errors.hpp"
#include "ttncirc/network.hpp"
#include "ttncirc/tensor.hpp"
#include "ttncirc/topology.hpp"

namespace ttncirc {

/// Sweep schedule for the gate optimizer. `convergence_tol` stops sweeping
/// once the per-sweep overlap improvement falls below it; 0 disables early
/// stopping so exactly `sweeps` passes run.
struct SweepConfig {
  std::size_t sweeps = 100;
  double learning_rate = 1.0;
  double convergence_tol = 1e-12;
};

namespace detail {

inline void validate_sweep_config(const SweepConfig& cfg) {
  if (cfg.sweeps < 1)
    throw PreconditionError("sweep_optimize: sweeps must be at least 1");
  if (!(cfg.learning_rate >= 0.0 && cfg.learning_rate <= 1.0))
    throw PreconditionError("sweep_optimize: learning rate must lie in [0, 1]");
  if (!(cfg.convergence_tol >= 0.0))
    throw PreconditionError("sweep_optimize: convergence_tol must be >= 0");
}

inline void apply_layer(StateVector& psi, const GateLayer& layer, bool adjoint) {
  if (!adjoint) {
    for (const Gate& g : layer.gates)
      apply_gate(psi, g.unitary, g.qubit_a, g.qubit_b, false);
  } else {
    for (std::size_t j = layer.gates.size(); j-- > 0;) {
      const Gate& g = layer.gates[j];
      apply_gate(psi, g.unitary, g.qubit_a, g.qubit_b, true);
    }
  }
}

/// Environment of one gate from the already-propagated dense vectors:
/// `back` carries the target pulled backward to just after the gate, `fwd`
/// carries |0^N> pushed forward to just before it.
inline Tensor gate_environment(const StateVector& back, const StateVector& fwd,
                               std::size_t n, std::size_t qa, std::size_t qb) {
  const std::size_t ma = std::size_t{1} << (n - 1 - qa);
  const std::size_t mb = std::size_t{1} << (n - 1 - qb);
  const std::size_t dim = std::size_t{1} << n;
  Complex acc[4][4] = {};
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & (ma | mb)) continue;
    const std::size_t at[4] = {base, base | mb, base | ma, base | ma | mb};
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        acc[r][c] += back[at[r]] * std::conj(fwd[at[c]]);
  }
  Tensor e({4, 4});
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) e.at({r, c}) = acc[r][c];
  return e;
}

}  // namespace detail

/// Trace pairing of an environment with a candidate gate: with E from
/// `environment`, pairing(E, G) is exactly the circuit-target overlap
/// <target|circuit(G)|0^N> of the circuit with G substituted at E's slot.
inline Complex pairing(const Tensor& e, const Tensor& g) {
  if (e.rank() != 2 || g.rank() != 2 || e.dim(0) != g.dim(0) ||
      e.dim(1) != g.dim(1))
    throw ShapeError("pairing: mismatched matrices");
  Complex s(0.0, 0.0);
  for (std::size_t f = 0; f < e.size(); ++f)
    s += std::conj(e[f]) * g[f];
  return s;
}

/// Environment tensor of the gate at (`layer_index`, `node_id`): everything
/// in <target|circuit|0^N> except that gate, contracted exactly over the
/// dense state vectors. Linear pairing with any 4x4 replacement gate yields
/// the overlap of the modified circuit.
inline Tensor environment(const StateVector& target,
                          const LayeredCircuit& circuit,
                          std::size_t layer_index, std::size_t node_id) {
  const std::size_t n = circuit.qubit_count;
  if (n > 24)
    throw ResourceError("environment: qubit count exceeds the dense bound of 24");
  if (target.size() != (std::size_t{1} << n))
    throw ShapeError("environment: target dimension does not match the circuit");
  if (layer_index >= circuit.layers.size())
    throw PreconditionError("environment: layer index out of range");
  const GateLayer& layer = circuit.layers[layer_index];
  std::size_t pos = layer.gates.size();
  for (std::size_t m = 0; m < layer.gates.size(); ++m)
    if (layer.gates[m].node_id == node_id) pos = m;
  if (pos == layer.gates.size())
    throw PreconditionError("environment: no gate with that node id");

  StateVector fwd = zero_state(n);
  for (std::size_t j = 0; j < layer_index; ++j)
    detail::apply_layer(fwd, circuit.layers[j], false);
  for (std::size_t m = 0; m < pos; ++m) {
    const Gate& g = layer.gates[m];
    apply_gate(fwd, g.unitary, g.qubit_a, g.qubit_b, false);
  }

  StateVector back = target;
  for (std::size_t j = circuit.layers.size(); j-- > layer_index + 1;)
    detail::apply_layer(back, circuit.layers[j], true);
  for (std::size_t m = layer.gates.size(); m-- > pos + 1;) {
    const Gate& g = layer.gates[m];
    apply_gate(back, g.unitary, g.qubit_a, g.qubit_b, true);
  }

  const Gate& g = layer.gates[pos];
  return detail::gate_environment(back, fwd, n, g.qubit_a, g.qubit_b);
}

inline Tensor environment(const TreeTensorNetwork& target,
                          const LayeredCircuit& circuit,
                          std::size_t layer_index, std::size_t node_id) {
  return environment(to_statevector(target), circuit, layer_index, node_id);
}

/// Unitary maximizing the real pairing with the environment: with E = USV†,
/// returns (UV†, sum of singular values). The pairing of E with UV† equals
/// that sum, and no unitary pairs higher in magnitude. A zero environment
/// returns the identity with overlap 0.
inline std::pair<Tensor, double> svd_update(const Tensor& e) {
  if (e.rank() != 2 || e.dim(0) != 4 || e.dim(1) != 4)
    throw ShapeError("svd_update: expected a 4x4 environment");
  const Eigen::MatrixXcd m = detail::to_matrix(e, 1);
  Tensor identity({4, 4});
  for (std::size_t j = 0; j < 4; ++j) identity.at({j, j}) = Complex(1.0, 0.0);
  if (m.norm() == 0.0) return {std::move(identity), 0.0};

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXcd u_new = svd.matrixU() * svd.matrixV().adjoint();
  return {detail::from_matrix(u_new, {4}, {4}), svd.singularValues().sum()};
}

/// A sweep-optimized circuit together with the |overlap| recorded after each
/// completed sweep.
struct SweepResult {
  LayeredCircuit circuit;
  std::vector<double> overlaps;
};

/// Alternating single-gate optimization: for each sweep, for each layer in
/// application order, for each gate in stored (node) order, the gate is
/// replaced by U_old (U_old† U_new)^r with U_new the environment's SVD
/// maximizer. At r = 1 each replacement is the exact local maximizer, so the
/// overlap is non-decreasing gate by gate. Backward target states and the
/// forward state are reused within a sweep, so one sweep costs one backward
/// and one forward pass plus one environment per gate.
inline SweepResult sweep_optimize(const LayeredCircuit& circuit_in,
                                  const StateVector& target,
                                  const SweepConfig& cfg) {
  detail::validate_sweep_config(cfg);
  const std::size_t n = circuit_in.qubit_count;
  if (n > 24)
    throw ResourceError("sweep_optimize: qubit count exceeds the dense bound of 24");
  if (target.size() != (std::size_t{1} << n))
    throw ShapeError("sweep_optimize: target dimension does not match the circuit");

  LayeredCircuit circuit = circuit_in;
  const std::size_t depth = circuit.layers.size();
  SweepResult out;
  out.overlaps.reserve(cfg.sweeps);
  double prev = -1.0;
  for (std::size_t t = 0; t < cfg.sweeps; ++t) {
    // Target pulled backward to the front of every layer.
    std::vector<StateVector> back(depth);
    if (depth > 0) {
      back[depth - 1] = target;
      for (std::size_t j = depth - 1; j-- > 0;) {
        back[j] = back[j + 1];
        detail::apply_layer(back[j], circuit.layers[j + 1], true);
      }
    }

    StateVector fwd = zero_state(n);
    for (std::size_t j = 0; j < depth; ++j) {
      GateLayer& layer = circuit.layers[j];
      const std::size_t count = layer.gates.size();
      // Suffix adjoints within the layer, from the gate values at layer
      // entry; gates after the one being updated still hold those values.
      std::vector<StateVector> suffix(count);
      if (count > 0) {
        suffix[count - 1] = back[j];
        for (std::size_t m = count - 1; m-- > 0;) {
          const Gate& g = layer.gates[m + 1];
          suffix[m] = suffix[m + 1];
          apply_gate(suffix[m], g.unitary, g.qubit_a, g.qubit_b, true);
        }
      }
      for (std::size_t m = 0; m < count; ++m) {
        Gate& g = layer.gates[m];
        const Tensor e =
            detail::gate_environment(suffix[m], fwd, n, g.qubit_a, g.qubit_b);
        auto [u_new, overlap] = svd_update(e);
        (void)overlap;
        if (cfg.learning_rate == 1.0) {
          g.unitary = std::move(u_new);
        } else {
          const Eigen::MatrixXcd old = detail::to_matrix(g.unitary, 1);
          const Eigen::MatrixXcd step = old.adjoint() * detail::to_matrix(u_new, 1);
          const Tensor powered = unitary_fractional_power(
              detail::from_matrix(step, {4}, {4}), cfg.learning_rate);
          g.unitary = detail::from_matrix(old * detail::to_matrix(powered, 1),
                                          {4}, {4});
        }
        apply_gate(fwd, g.unitary, g.qubit_a, g.qubit_b, false);
      }
    }

    // fwd now holds the full circuit state with every gate updated.
    const double ov = std::abs(inner_product(target, fwd));
    out.overlaps.push_back(ov);
    if (cfg.convergence_tol > 0.0 && t > 0 && ov - prev < cfg.convergence_tol) {
      prev = ov;
      break;
    }
    prev = ov;
  }
  out.circuit = std::move(circuit);
  return out;
}

inline SweepResult sweep_optimize(const LayeredCircuit& circuit_in,
                                  const TreeTensorNetwork& target,
                                  const SweepConfig& cfg) {
  return sweep_optimize(circuit_in, to_statevector(target), cfg);
}

/// The four embedding strategies: plain decomposition, optimization of
/// identity-seeded layers, and the two iterative schemes that add one layer
/// at a time seeded with the identity (Iter_I) or with a decomposition layer
/// of the re-derived residual state (Iter_D).
enum class EmbedMethod { DAll, OAll, IterI, IterD };

inline std::string embed_method_name(EmbedMethod method) {
  switch (method) {
    case EmbedMethod::DAll: return "D_all";
    case EmbedMethod::OAll: return "O_all";
    case EmbedMethod::IterI: return "Iter_I";
    case EmbedMethod::IterD: return "Iter_D";
  }
  throw PreconditionError("embed_method_name: unknown method");
}

inline EmbedMethod parse_embed_method(const std::string& tag) {
  if (tag == "D_all") return EmbedMethod::DAll;
  if (tag == "O_all") return EmbedMethod::OAll;
  if (tag == "Iter_I") return EmbedMethod::IterI;
  if (tag == "Iter_D") return EmbedMethod::IterD;
  throw ConfigError("unknown embed method: " + tag);
}

/// One observation of the embedding run: the infidelity after `sweep` sweeps
/// at a circuit depth of `layer_count` layers (sweep 0 is the state right
/// after the layer was added), plus the wall-clock seconds elapsed since the
/// run started.
struct EmbedRow {
  std::size_t layer_count = 0;
  std::size_t sweep = 0;
  double infidelity = 0.0;
  double seconds = 0.0;
};

struct EmbedReport {
  EmbedMethod method = EmbedMethod::DAll;
  std::size_t qubit_count = 0;
  std::size_t layer_count = 0;
  SweepConfig config;
  std::size_t chi_cap = 0;
  double rel_tol = 0.0;
  std::vector<EmbedRow> rows;
  LayeredCircuit circuit;
  double final_infidelity = 1.0;
  double total_seconds = 0.0;
};

namespace detail {

class EmbedClock {
 public:
  EmbedClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double circuit_infidelity(const StateVector& target,
                                 const LayeredCircuit& circuit) {
  const StateVector state = apply_circuit(circuit, zero_state(circuit.qubit_count));
  return infidelity(target, state);
}

}  // namespace detail

/// Runs one embedding strategy for `layer_count` layers against `psi0` and
/// reports the full infidelity trace. `chi_cap` and `rel_tol` control the
/// adjoint-layer absorptions used by D_all and Iter_D (chi_cap 0 selects
/// psi0's maximum virtual bond).
inline EmbedReport embed(const TreeTensorNetwork& psi0, EmbedMethod method,
                         std::size_t layer_count, const SweepConfig& cfg,
                         std::size_t chi_cap = 0, double rel_tol = 1e-12) {
  detail::validate_sweep_config(cfg);
  if (layer_count < 1)
    throw PreconditionError("embed: layer_count must be at least 1");
  if (!is_canonical(psi0))
    throw PreconditionError("embed: psi0 is not canonical");
  const std::size_t cap =
      chi_cap == 0 ? std::max<std::size_t>(psi0.max_virtual_bond(), 1) : chi_cap;
  const detail::EmbedClock clock;
  const TreeTopology& topo = psi0.topology;
  const std::size_t n = psi0.qubit_count();
  const StateVector target = to_statevector(psi0);

  EmbedReport report;
  report.method = method;
  report.qubit_count = n;
  report.layer_count = layer_count;
  report.config = cfg;
  report.chi_cap = cap;
  report.rel_tol = rel_tol;
  report.circuit.qubit_count = n;

  const auto record = [&](std::size_t k, std::size_t sweep, double inf) {
    report.rows.push_back(EmbedRow{k, sweep, inf, clock.seconds()});
  };
  const auto record_sweeps = [&](std::size_t k,
                                 const std::vector<double>& overlaps) {
    for (std::size_t t = 0; t < overlaps.size(); ++t)
      record(k, t + 1, std::max(0.0, 1.0 - overlaps[t]));
  };

  switch (method) {
    case EmbedMethod::DAll: {
      const DecompositionResult dec =
          systematic_decomposition(psi0, layer_count, cap, rel_tol);
      for (std::size_t k = 1; k <= layer_count; ++k) {
        LayeredCircuit prefix;
        prefix.qubit_count = n;
        prefix.layers.assign(dec.circuit.layers.end() -
                                 static_cast<std::ptrdiff_t>(k),
                             dec.circuit.layers.end());
        record(k, 0, detail::circuit_infidelity(target, prefix));
      }
      report.circuit = dec.circuit;
      break;
    }
    case EmbedMethod::OAll: {
      for (std::size_t k = 0; k < layer_count; ++k)
        report.circuit.layers.push_back(identity_layer(topo));
      record(layer_count, 0, detail::circuit_infidelity(target, report.circuit));
      SweepResult opt = sweep_optimize(report.circuit, target, cfg);
      record_sweeps(layer_count, opt.overlaps);
      report.circuit = std::move(opt.circuit);
      break;
    }
    case EmbedMethod::IterI: {
      for (std::size_t k = 1; k <= layer_count; ++k) {
        report.circuit.layers.insert(report.circuit.layers.begin(),
                                     identity_layer(topo));
        record(k, 0, detail::circuit_infidelity(target, report.circuit));
        SweepResult opt = sweep_optimize(report.circuit, target, cfg);
        record_sweeps(k, opt.overlaps);
        report.circuit = std::move(opt.circuit);
      }
      break;
    }
    case EmbedMethod::IterD: {
      TreeTensorNetwork psi = set_center(psi0, topo.root());
      for (std::size_t k = 1; k <= layer_count; ++k) {
        const TreeTensorNetwork chi2 = truncate_to_chi(psi, 2);
        report.circuit.layers.insert(report.circuit.layers.begin(),
                                     layer_from_chi2(chi2));
        record(k, 0, detail::circuit_infidelity(target, report.circuit));
        SweepResult opt = sweep_optimize(report.circuit, target, cfg);
        record_sweeps(k, opt.overlaps);
        report.circuit = std::move(opt.circuit);
        if (k == layer_count) break;
        // Re-derive the residual: absorb the optimized layers into a fresh
        // copy of the target, oldest extracted layer first.
        psi = set_center(psi0, topo.root());
        for (std::size_t idx = report.circuit.layers.size(); idx-- > 0;)
          psi = absorb_layer_adjoint(psi, report.circuit.layers[idx], cap,
                                     rel_tol);
      }
      break;
    }
  }

  report.final_infidelity = report.rows.back().infidelity;
  report.total_seconds = clock.seconds();
  return report;
}

inline EmbedReport embed(const TreeTensorNetwork& psi0, const std::string& method,
                         std::size_t layer_count, const SweepConfig& cfg,
                         std::size_t chi_cap = 0, double rel_tol = 1e-12) {
  return embed(psi0, parse_embed_method(method), layer_count, cfg, chi_cap,
               rel_tol);
}

}  // namespace ttncirc
