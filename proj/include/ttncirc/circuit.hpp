// SPDX-License-Identifier: Apache-2.0
//
// Layered two-qubit-gate circuits with tree connectivity: conversion of a
// chi=2 TTN into one gate layer, and dense state-vector application of
// circuits and their adjoints.
#pragma once

#include <bit>
#include <cstddef>
#include <vector>

#include "ttncirc/network.hpp"
#include "ttncirc/tensor.hpp"
#include "ttncirc/topology.hpp"

namespace ttncirc {

/// One two-qubit gate. qubit_a is the representative wire of the tree node's
/// left subtree, qubit_b of its right subtree. Row/column index convention of
/// the 4x4 unitary: 2*bit(qubit_a) + bit(qubit_b).
struct Gate {
  std::size_t node_id = 0;
  std::size_t qubit_a = 0;
  std::size_t qubit_b = 0;
  Tensor unitary;  // (4, 4)
};

/// One gate per internal tree node, in BFS order (root first).
struct GateLayer {
  std::vector<Gate> gates;

  void validate(std::size_t qubit_count) const {
    for (const Gate& g : gates) {
      if (g.qubit_a >= qubit_count || g.qubit_b >= qubit_count ||
          g.qubit_a == g.qubit_b) {
        throw PreconditionError("GateLayer: qubit index out of range on node " +
                                std::to_string(g.node_id));
      }
      if (g.unitary.rank() != 2 || g.unitary.dim(0) != 4 || g.unitary.dim(1) != 4) {
        throw ShapeError("GateLayer: gate on node " + std::to_string(g.node_id) +
                         " is not 4x4");
      }
      const Eigen::MatrixXcd m = detail::to_matrix(g.unitary, 1);
      if ((m.adjoint() * m - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() >
          1e-10) {
        throw PreconditionError("GateLayer: gate on node " +
                                std::to_string(g.node_id) + " is not unitary");
      }
    }
  }
};

/// Layers are applied to |0^N> in increasing index order.
struct LayeredCircuit {
  std::size_t qubit_count = 0;
  std::vector<GateLayer> layers;
};

namespace detail {

/// Zero-extends one axis to the requested dimension.
inline Tensor pad_axis_to(const Tensor& t, std::size_t axis, std::size_t dim) {
  if (t.dim(axis) == dim) return t;
  std::vector<std::size_t> shape = t.shape();
  shape[axis] = dim;
  Tensor out(shape);
  std::vector<std::size_t> idx(t.rank(), 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    out.at(idx) = t[flat];
    for (std::size_t a = t.rank(); a-- > 0;) {
      if (++idx[a] < t.dim(a)) break;
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace detail

/// Converts a chi<=2 canonical TTN (center at root) into one layer of 4x4
/// unitaries. Node i's tensor, zero-padded to (p, 2, 2) on the child axes and
/// reshaped to a (children -> parent) 4xp isometry, occupies gate columns 2p:
/// the parent-bond basis arrives on qubit_a while qubit_b is the fresh |0>
/// ancilla. Unused columns are filled by unitary completion. Applying the
/// layer to |0^N> reproduces to_statevector(ttn2).
inline GateLayer layer_from_chi2(const TreeTensorNetwork& ttn2) {
  const TreeTopology& topo = ttn2.topology;
  if (ttn2.canonical_center != topo.root()) {
    throw PreconditionError("layer_from_chi2: canonical center must be the root");
  }
  if (ttn2.max_virtual_bond() > 2) {
    throw PreconditionError("layer_from_chi2: a bond exceeds dimension 2");
  }

  GateLayer layer;
  for (std::size_t i = 1; i <= topo.internal_count(); ++i) {
    Tensor a = detail::pad_axis_to(ttn2.tensors[i], 1, 2);
    a = detail::pad_axis_to(a, 2, 2);
    const std::size_t pdim = a.dim(0);
    // rows (2l + r), columns p
    const Tensor v = a.permuted({1, 2, 0}).reshaped({4, pdim});
    const Tensor completed = complete_isometry_to_unitary(v);

    Tensor u({4, 4});
    for (std::size_t p = 0; p < pdim; ++p)
      for (std::size_t row = 0; row < 4; ++row) u.at({row, 2 * p}) = v.at({row, p});
    std::size_t spare = pdim;
    for (std::size_t col = 0; col < 4; ++col) {
      if (col < 2 * pdim && col % 2 == 0) continue;
      for (std::size_t row = 0; row < 4; ++row)
        u.at({row, col}) = completed.at({row, spare});
      ++spare;
    }

    layer.gates.push_back(Gate{i, topo.rep_qubit(topo.left(i)),
                               topo.rep_qubit(topo.right(i)), std::move(u)});
  }
  return layer;
}

/// Applies one 4x4 gate to a dense state in place. With adjoint set, applies
/// the conjugate transpose.
inline void apply_gate(StateVector& psi, const Tensor& unitary, std::size_t qubit_a,
                       std::size_t qubit_b, bool adjoint = false) {
  const std::size_t dim = psi.size();
  const std::size_t n = static_cast<std::size_t>(std::bit_width(dim)) - 1;
  if (dim == 0 || (std::size_t{1} << n) != dim) {
    throw ShapeError("apply_gate: state dimension is not a power of two");
  }
  if (qubit_a >= n || qubit_b >= n || qubit_a == qubit_b) {
    throw PreconditionError("apply_gate: qubit index out of range");
  }
  const std::size_t ma = std::size_t{1} << (n - 1 - qubit_a);
  const std::size_t mb = std::size_t{1} << (n - 1 - qubit_b);

  Complex g[4][4];
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      g[r][c] = adjoint ? std::conj(unitary.at({c, r})) : unitary.at({r, c});

  for (std::size_t base = 0; base < dim; ++base) {
    if (base & (ma | mb)) continue;
    const std::size_t at[4] = {base, base | mb, base | ma, base | ma | mb};
    const Complex in[4] = {psi[at[0]], psi[at[1]], psi[at[2]], psi[at[3]]};
    for (std::size_t r = 0; r < 4; ++r) {
      psi[at[r]] =
          g[r][0] * in[0] + g[r][1] * in[1] + g[r][2] * in[2] + g[r][3] * in[3];
    }
  }
}

/// Applies the circuit to a dense state: layers in increasing index order and
/// gates in BFS order within each layer. Adjoint mode reverses both orders and
/// conjugate-transposes every gate.
inline StateVector apply_circuit(const LayeredCircuit& circuit, const StateVector& psi,
                                 bool adjoint = false) {
  if (circuit.qubit_count > 24) {
    throw ResourceError("apply_circuit: qubit count exceeds the dense bound of 24");
  }
  StateVector out = psi;
  if (!adjoint) {
    for (const GateLayer& layer : circuit.layers)
      for (const Gate& gate : layer.gates)
        apply_gate(out, gate.unitary, gate.qubit_a, gate.qubit_b, false);
  } else {
    for (std::size_t l = circuit.layers.size(); l-- > 0;) {
      const GateLayer& layer = circuit.layers[l];
      for (std::size_t g = layer.gates.size(); g-- > 0;) {
        const Gate& gate = layer.gates[g];
        apply_gate(out, gate.unitary, gate.qubit_a, gate.qubit_b, true);
      }
    }
  }
  return out;
}

/// |0^N>.
inline StateVector zero_state(std::size_t qubit_count) {
  StateVector v(std::size_t{1} << qubit_count, Complex(0.0, 0.0));
  v[0] = Complex(1.0, 0.0);
  return v;
}

/// One layer of identity gates on the tree wiring, the starting point for
/// optimization methods that do not seed layers from a decomposition.
inline GateLayer identity_layer(const TreeTopology& topology) {
  GateLayer layer;
  for (std::size_t i = 1; i < topology.qubit_count(); ++i) {
    Tensor u({4, 4});
    for (std::size_t j = 0; j < 4; ++j) u.at({j, j}) = Complex(1.0, 0.0);
    layer.gates.push_back(Gate{i, topology.rep_qubit(topology.left(i)),
                               topology.rep_qubit(topology.right(i)),
                               std::move(u)});
  }
  return layer;
}

}  // namespace ttncirc
