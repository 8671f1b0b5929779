// SPDX-License-Identifier: Apache-2.0
//
// Decomposition of a tree tensor network into disentangling circuit layers:
// operator-Schmidt splitting of two-qubit gates, penetration of gate halves
// through network tensors, adjoint-layer absorption, and the systematic
// multi-layer decomposition built from them.
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ttncirc/circuit.hpp"
#include "ttncirc/errors.hpp"
#include "ttncirc/network.hpp"
#include "ttncirc/tensor.hpp"
#include "ttncirc/topology.hpp"

namespace ttncirc {

/// Operator-Schmidt halves of a two-qubit gate. `up` acts on the gate's first
/// wire with axes (wire-in 2, wire-out 2, internal bond b); `lo` acts on the
/// second wire with axes (internal bond b, wire-in 2, wire-out 2). Contracting
/// the halves over the internal bond reproduces the gate.
struct GateHalves {
  Tensor up;
  Tensor lo;
  std::size_t bond_dim = 0;
};

/// Splits a 4x4 two-qubit unitary into operator-Schmidt halves, one per wire.
/// Singular values are shared evenly (square root on each side). The internal
/// bond dimension is the operator-Schmidt rank: 1 for products of one-qubit
/// gates, up to 4 in general.
inline GateHalves split_gate(const Tensor& gate) {
  if (gate.rank() != 2 || gate.dim(0) != 4 || gate.dim(1) != 4)
    throw ShapeError("split_gate: expected a 4x4 gate");
  const Eigen::MatrixXcd m = detail::to_matrix(gate, 1);
  const double dev = (m.adjoint() * m - Eigen::MatrixXcd::Identity(4, 4))
                         .cwiseAbs()
                         .maxCoeff();
  if (dev > 1e-8)
    throw PreconditionError("split_gate: gate is not unitary, deviation " +
                            std::to_string(dev));

  // Row index packs (a_out, b_out), column index (a_in, b_in); regroup so the
  // first wire's indices form one side of the split.
  const Tensor t = gate.reshaped({2, 2, 2, 2}).permuted({0, 2, 1, 3});
  SvdSplit split = svd_split(t, {0, 1}, kUnbounded, 1e-12);
  const std::size_t b = split.singular_values.size();

  Tensor up = std::move(split.left);    // (a_out, a_in, b), bond axis fastest
  Tensor lo = std::move(split.right);   // (b, b_out, b_in), bond axis slowest
  for (std::size_t f = 0; f < up.size(); ++f)
    up.values()[f] *= std::sqrt(split.singular_values[f % b]);
  const std::size_t lo_row = lo.size() / b;
  for (std::size_t f = 0; f < lo.size(); ++f)
    lo.values()[f] *= std::sqrt(split.singular_values[f / lo_row]);

  GateHalves halves;
  halves.up = up.permuted({1, 0, 2});
  halves.lo = lo.permuted({0, 2, 1});
  halves.bond_dim = b;
  return halves;
}

/// Axis roles for one penetration step. The moving tensor contracts with the
/// through tensor over one shared bond; its deposit axes stay behind at the
/// through site while the remaining (carry) axes travel onward together with
/// the through tensor's exit axis.
struct PenetrationPlan {
  std::size_t moving_shared_axis = 0;
  std::vector<std::size_t> moving_deposit_axes;
  std::size_t through_shared_axis = 0;
  std::size_t through_exit_axis = 0;
};

/// Result of one penetration step. `through` has the surviving through axes
/// (original order, exit axis removed), then the deposit axes, then the new
/// bond as last axis, and is isometric when reshaped with the new bond as
/// columns. `moving` has the new bond first, then the exit axis, then the
/// carry axes, and holds all singular weight. `error` is the relative norm of
/// the discarded singular values.
struct PenetrationResult {
  Tensor through;
  Tensor moving;
  double error = 0.0;
};

/// Passes `moving` through `through` across one shared bond: contracts the
/// pair, then splits it again with the deposit axes left at the through site
/// and the exit direction carried away. With an unbounded cap the contraction
/// of the outputs over the new bond equals the contraction of the inputs.
inline PenetrationResult penetrate(const Tensor& moving, const Tensor& through,
                                   const PenetrationPlan& plan,
                                   std::size_t chi_cap = kUnbounded,
                                   double rel_tol = 0.0) {
  if (chi_cap < 1)
    throw PreconditionError("penetrate: chi_cap must be at least 1");
  if (plan.through_exit_axis >= through.rank() ||
      plan.through_exit_axis == plan.through_shared_axis)
    throw PreconditionError("penetrate: invalid exit axis");
  for (const std::size_t d : plan.moving_deposit_axes)
    if (d >= moving.rank() || d == plan.moving_shared_axis)
      throw PreconditionError("penetrate: invalid deposit axis");
  if (plan.through_shared_axis >= through.rank() ||
      plan.moving_shared_axis >= moving.rank() ||
      through.dim(plan.through_shared_axis) !=
          moving.dim(plan.moving_shared_axis))
    throw PreconditionError("penetrate: tensors do not share the given bond");

  // Combined axes: through's free axes in order, then moving's free axes.
  const Tensor combined = contract(through, {plan.through_shared_axis}, moving,
                                   {plan.moving_shared_axis});
  const auto through_pos = [&](std::size_t a) {
    return a - (a > plan.through_shared_axis ? 1 : 0);
  };
  const std::size_t through_free = through.rank() - 1;
  const auto moving_pos = [&](std::size_t a) {
    return through_free + a - (a > plan.moving_shared_axis ? 1 : 0);
  };

  std::vector<std::size_t> stay;
  for (std::size_t a = 0; a < through.rank(); ++a)
    if (a != plan.through_shared_axis && a != plan.through_exit_axis)
      stay.push_back(through_pos(a));
  for (const std::size_t d : plan.moving_deposit_axes)
    stay.push_back(moving_pos(d));

  SvdSplit split = svd_split(combined, stay, chi_cap, rel_tol);
  const std::size_t keep = split.singular_values.size();
  Tensor out_moving = std::move(split.right);
  const std::size_t row = out_moving.size() / keep;
  for (std::size_t f = 0; f < out_moving.size(); ++f)
    out_moving.values()[f] *= split.singular_values[f / row];

  PenetrationResult res;
  res.through = std::move(split.left);
  res.moving = std::move(out_moving);
  res.error = split.truncation_error;
  return res;
}

namespace detail {

/// Carries a gate half with axes (deposit, shared, carry) from `leaf` up the
/// tree until it reaches `target`, penetrating every internal node strictly
/// between them. Every node on that chain holds the previous node (or the
/// leaf) as its left child, so the shared bond is always the left axis.
inline Tensor penetrate_chain(TreeTensorNetwork& net, Tensor moving,
                              std::size_t leaf, std::size_t target,
                              std::size_t chi_cap, double rel_tol,
                              double& error_sum) {
  std::vector<std::size_t> chain;
  for (std::size_t v = net.topology.parent(leaf); v != target;
       v = net.topology.parent(v))
    chain.push_back(v);

  PenetrationPlan plan;
  plan.moving_shared_axis = 1;
  plan.moving_deposit_axes = {0};
  plan.through_shared_axis = 1;
  plan.through_exit_axis = 0;
  for (const std::size_t v : chain) {
    PenetrationResult res =
        penetrate(moving, net.tensors[v], plan, chi_cap, rel_tol);
    error_sum += res.error;
    // penetrate returns (right bond, deposit, new bond); the node tensor
    // wants (parent, left, right) with the new bond toward the parent.
    net.tensors[v] = res.through.permuted({2, 1, 0});
    moving = std::move(res.moving);
  }
  return moving;
}

}  // namespace detail

/// Absorbs the adjoint of a disentangling layer into the network: for node
/// ids from the largest down to the root, the gate's adjoint is split into
/// wire halves, each half is penetrated from its attachment leaf up to the
/// node, and both halves are contracted into that node's tensor. New bonds
/// opened by penetration are capped at `chi_cap` (0 selects the input
/// network's current maximum virtual bond). The result is re-canonicalized
/// to the root and renormalized. If `cumulative_error` is given it receives
/// the sum of all penetration truncation errors.
inline TreeTensorNetwork absorb_layer_adjoint(const TreeTensorNetwork& ttn,
                                              const GateLayer& layer,
                                              std::size_t chi_cap = 0,
                                              double rel_tol = 1e-12,
                                              double* cumulative_error = nullptr) {
  const TreeTopology& topo = ttn.topology;
  const std::size_t n = topo.qubit_count();
  std::vector<const Gate*> by_node(n, nullptr);
  if (layer.gates.size() != n - 1)
    throw PreconditionError(
        "absorb_layer_adjoint: layer gate count does not match the topology");
  for (const Gate& g : layer.gates) {
    if (!topo.is_internal(g.node_id) || by_node[g.node_id] != nullptr ||
        g.qubit_a != topo.rep_qubit(topo.left(g.node_id)) ||
        g.qubit_b != topo.rep_qubit(topo.right(g.node_id)))
      throw PreconditionError(
          "absorb_layer_adjoint: gate wiring does not match the topology");
    by_node[g.node_id] = &g;
  }
  const std::size_t cap =
      chi_cap == 0 ? std::max<std::size_t>(ttn.max_virtual_bond(), 1) : chi_cap;

  TreeTensorNetwork net = ttn;
  double error_sum = 0.0;
  for (std::size_t i = n - 1; i >= 1; --i) {
    const Gate& g = *by_node[i];
    Tensor adj({4, 4});
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        adj.at({r, c}) = std::conj(g.unitary.at({c, r}));
    const GateHalves halves = split_gate(adj);

    // Reorder both halves to (deposit, shared, carry): the wire-out axis is
    // left behind as the new physical leg, the wire-in axis contracts with
    // the network, and the internal bond travels up to node i.
    const Tensor up = halves.up.permuted({1, 0, 2});
    const Tensor lo = halves.lo.permuted({2, 1, 0});

    const Tensor m_up =
        detail::penetrate_chain(net, up, topo.qubit_leaf(g.qubit_a), i, cap,
                                rel_tol, error_sum);
    const Tensor t = contract(net.tensors[i], {1}, m_up, {1});
    const Tensor m_lo =
        detail::penetrate_chain(net, lo, topo.qubit_leaf(g.qubit_b), i, cap,
                                rel_tol, error_sum);
    // t is (parent, right, new left, gate bond); pair the right axis with the
    // half's shared axis and close the internal gate bond with its carry.
    net.tensors[i] = contract(t, {1, 3}, m_lo, {1, 2});
  }

  net = canonicalize_to_root(net);
  if (cumulative_error != nullptr) *cumulative_error = error_sum;
  return net;
}

/// Outcome of the systematic decomposition. `circuit` holds the extracted
/// layers in application order (the last layer extracted is applied first to
/// the zero state). The per-iteration diagnostics record the infidelity of
/// each bond-2 truncation and the penetration error of each absorption.
struct DecompositionResult {
  LayeredCircuit circuit;
  std::vector<double> truncation_infidelities;
  std::vector<double> absorption_errors;
};

/// Decomposes a canonical network into `layer_count` disentangling layers:
/// each iteration truncates the working state to bond dimension 2, reads off
/// the exact layer for that truncation, and absorbs the layer's adjoint back
/// into the working state. `chi_cap` bounds the working state's bonds during
/// absorption (0 selects the input network's maximum virtual bond).
inline DecompositionResult systematic_decomposition(
    const TreeTensorNetwork& psi0, std::size_t layer_count,
    std::size_t chi_cap = 0, double rel_tol = 1e-12) {
  if (layer_count < 1)
    throw PreconditionError(
        "systematic_decomposition: layer_count must be at least 1");
  if (!is_canonical(psi0))
    throw PreconditionError("systematic_decomposition: input is not canonical");
  const std::size_t cap =
      chi_cap == 0 ? std::max<std::size_t>(psi0.max_virtual_bond(), 1)
                   : chi_cap;

  TreeTensorNetwork psi = set_center(psi0, psi0.topology.root());
  DecompositionResult out;
  out.circuit.qubit_count = psi0.qubit_count();
  std::vector<GateLayer> extracted;
  extracted.reserve(layer_count);
  for (std::size_t k = 0; k < layer_count; ++k) {
    double trunc_inf = 0.0;
    const TreeTensorNetwork chi2 = truncate_to_chi(psi, 2, &trunc_inf);
    out.truncation_infidelities.push_back(trunc_inf);
    GateLayer layer = layer_from_chi2(chi2);
    double absorb_err = 0.0;
    psi = absorb_layer_adjoint(psi, layer, cap, rel_tol, &absorb_err);
    out.absorption_errors.push_back(absorb_err);
    extracted.push_back(std::move(layer));
  }
  out.circuit.layers.assign(extracted.rbegin(), extracted.rend());
  return out;
}

}  // namespace ttncirc
