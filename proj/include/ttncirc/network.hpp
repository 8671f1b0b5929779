// SPDX-License-Identifier: Apache-2.0
//
// Binary tree tensor networks in canonical form: construction from state
// vectors, canonical-center movement, bond truncation, contraction back to
// state vectors, inner products, and infidelity.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ttncirc/tensor.hpp"
#include "ttncirc/topology.hpp"

namespace ttncirc {

/// Tree tensor network over a TreeTopology. Internal node i owns a rank-3
/// tensor A^(i) with axis order (parent bond, left child bond, right child
/// bond); a leaf-facing axis is that qubit's physical leg of dimension 2, and
/// the root's parent bond has dimension 1. All tensors not at the canonical
/// center are isometric toward it. Operations treat networks as immutable and
/// return new values.
struct TreeTensorNetwork {
  TreeTopology topology;
  std::vector<Tensor> tensors;  // indexed by internal node id; entry 0 unused
  std::size_t canonical_center = 1;

  std::size_t qubit_count() const { return topology.qubit_count(); }
  const Tensor& tensor(std::size_t id) const { return tensors.at(id); }

  /// Dimension of the edge between `child` and its parent: the virtual bond
  /// for an internal child, the physical leg (2) for a leaf.
  std::size_t bond_dim(std::size_t child) const {
    return topology.is_leaf(child) ? 2 : tensors.at(child).dim(0);
  }

  /// Largest virtual bond dimension (1 when the tree has a single node).
  std::size_t max_virtual_bond() const {
    std::size_t m = 1;
    for (std::size_t i = 2; i <= topology.internal_count(); ++i)
      m = std::max(m, tensors[i].dim(0));
    return m;
  }

  /// Global norm, assuming canonical form: the center carries all the weight.
  double norm() const { return tensors[canonical_center].norm(); }

  /// Shape consistency: rank-3 tensors, matching bond dimensions along every
  /// edge, dimension-2 leaf axes, dimension-1 root parent axis.
  void check_structure() const {
    const std::size_t n = topology.qubit_count();
    if (tensors.size() != n) {
      throw ShapeError("TreeTensorNetwork: expected " + std::to_string(n - 1) +
                       " internal tensors");
    }
    if (!topology.is_internal(canonical_center)) {
      throw ShapeError("TreeTensorNetwork: canonical_center is not internal");
    }
    for (std::size_t i = 1; i <= n - 1; ++i) {
      const Tensor& t = tensors[i];
      if (t.rank() != 3) {
        throw ShapeError("TreeTensorNetwork: tensor at node " + std::to_string(i) +
                         " is not rank 3");
      }
      if (i == topology.root() && t.dim(0) != 1) {
        throw ShapeError("TreeTensorNetwork: root parent bond must have dimension 1");
      }
      const std::size_t kids[2] = {topology.left(i), topology.right(i)};
      for (int c = 0; c < 2; ++c) {
        const std::size_t want =
            topology.is_leaf(kids[c]) ? 2 : tensors[kids[c]].dim(0);
        if (t.dim(static_cast<std::size_t>(c + 1)) != want) {
          throw ShapeError("TreeTensorNetwork: bond mismatch on edge " +
                           std::to_string(i) + "-" + std::to_string(kids[c]));
        }
      }
    }
  }
};

namespace detail {

/// Moves axis `from` of t to position `to`, keeping the other axes in order.
inline Tensor move_axis(const Tensor& t, std::size_t from, std::size_t to) {
  std::vector<std::size_t> order;
  order.reserve(t.rank());
  for (std::size_t a = 0; a < t.rank(); ++a)
    if (a != from) order.push_back(a);
  order.insert(order.begin() + static_cast<std::ptrdiff_t>(to), from);
  return t.permuted(order);
}

/// Shifts the canonical weight across the edge between adjacent internal
/// nodes a and b via thin QR: a keeps the orthonormal factor, b absorbs R.
inline void shift_center_edge(TreeTensorNetwork& net, std::size_t a, std::size_t b) {
  const std::size_t ax_a = net.topology.axis_toward(a, b);
  const std::size_t ax_b = net.topology.axis_toward(b, a);

  const Tensor ap = move_axis(net.tensors[a], ax_a, 2);
  const std::size_t d1 = ap.dim(0), d2 = ap.dim(1), db = ap.dim(2);
  const Eigen::MatrixXcd m = to_matrix(ap, 2);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  const Eigen::MatrixXcd q =
      qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
  const Eigen::MatrixXcd r = qr.matrixQR()
                                 .topRows(k)
                                 .triangularView<Eigen::Upper>()
                                 .toDenseMatrix();

  Tensor qa = from_matrix(q, {d1, d2}, {static_cast<std::size_t>(k)});
  net.tensors[a] = move_axis(qa, 2, ax_a);
  const Tensor rt = from_matrix(r, {static_cast<std::size_t>(k)}, {db});
  Tensor bt = contract(rt, {1}, net.tensors[b], {ax_b});
  net.tensors[b] = move_axis(bt, 0, ax_b);
}

}  // namespace detail

/// Restores canonical form on a network whose tensors are not isometric (for
/// example after operator absorption): one bottom-up QR sweep followed by
/// renormalization of the root tensor. The represented ray is unchanged.
inline TreeTensorNetwork canonicalize_to_root(const TreeTensorNetwork& in) {
  TreeTensorNetwork net = in;
  const std::size_t n = net.topology.qubit_count();
  for (std::size_t v = n - 1; v >= 2; --v)
    detail::shift_center_edge(net, v, net.topology.parent(v));
  net.canonical_center = net.topology.root();
  const double nrm = net.tensors[net.canonical_center].norm();
  for (Complex& x : net.tensors[net.canonical_center].values()) x /= nrm;
  return net;
}

/// Moves the canonical center to `target` stepwise along the tree path. The
/// represented state is unchanged.
inline TreeTensorNetwork set_center(const TreeTensorNetwork& in, std::size_t target) {
  if (!in.topology.is_internal(target)) {
    throw PreconditionError("set_center: unknown node id " + std::to_string(target));
  }
  if (target == in.canonical_center) return in;
  TreeTensorNetwork net = in;
  const std::vector<std::size_t> path = in.topology.path(in.canonical_center, target);
  for (std::size_t s = 0; s + 1 < path.size(); ++s)
    detail::shift_center_edge(net, path[s], path[s + 1]);
  net.canonical_center = target;
  return net;
}

/// Builds a canonical TTN from a dense state by splitting off one cluster per
/// internal node, deepest nodes first, truncating every new bond to chi_max.
/// The result has its center at the root and unit norm. When given,
/// *truncation_infidelity receives 1 - |<psi|result>| as implied by the
/// discarded singular values.
inline TreeTensorNetwork from_statevector(const StateVector& psi,
                                          const TreeTopology& topology,
                                          std::size_t chi_max,
                                          double* truncation_infidelity = nullptr) {
  const std::size_t n = topology.qubit_count();
  if (n > 24) {
    throw ResourceError("from_statevector: " + std::to_string(n) +
                        " qubits exceeds the dense-construction bound of 24");
  }
  if (psi.size() != (std::size_t{1} << n)) {
    throw ShapeError("from_statevector: state has " + std::to_string(psi.size()) +
                     " amplitudes but the topology has " + std::to_string(n) +
                     " qubits");
  }
  if (chi_max == 0) {
    throw PreconditionError("from_statevector: chi_max must be positive");
  }
  double nrm = 0.0;
  for (const Complex& v : psi) nrm += std::norm(v);
  nrm = std::sqrt(nrm);
  if (std::abs(nrm - 1.0) > 1e-10) {
    throw PreconditionError("from_statevector: input state is not normalized");
  }

  Tensor w(std::vector<std::size_t>(n, 2), psi);
  for (Complex& v : w.values()) v /= nrm;

  // Axis position of each pending cluster in w, keyed by node id.
  std::vector<std::size_t> cluster_axis(topology.node_count() + 1, kUnbounded);
  for (std::size_t id = n; id <= 2 * n - 1; ++id)
    cluster_axis[id] = topology.leaf_qubit(id);

  std::vector<Tensor> tensors(n);
  double fidelity_sq = 1.0;

  for (std::size_t i = n - 1; i >= 2; --i) {
    const std::size_t cl = topology.left(i), cr = topology.right(i);
    const std::size_t al = cluster_axis[cl], ar = cluster_axis[cr];
    SvdSplit split = svd_split(w, {al, ar}, chi_max, 1e-14);
    tensors[i] = split.left.permuted({2, 0, 1});
    fidelity_sq *= 1.0 - split.truncation_error * split.truncation_error;

    const std::size_t keep = split.singular_values.size();
    const std::size_t row = split.right.size() / keep;
    for (std::size_t j = 0; j < keep; ++j)
      for (std::size_t c = 0; c < row; ++c)
        split.right[j * row + c] *= split.singular_values[j];

    cluster_axis[cl] = kUnbounded;
    cluster_axis[cr] = kUnbounded;
    for (std::size_t id = 1; id <= 2 * n - 1; ++id) {
      if (cluster_axis[id] == kUnbounded) continue;
      const std::size_t p = cluster_axis[id];
      cluster_axis[id] = 1 + p - (al < p ? 1 : 0) - (ar < p ? 1 : 0);
    }
    cluster_axis[i] = 0;
    w = std::move(split.right);
  }

  const std::size_t al = cluster_axis[topology.left(1)];
  const std::size_t ar = cluster_axis[topology.right(1)];
  Tensor root = w.permuted({al, ar});
  tensors[1] = root.reshaped({1, root.dim(0), root.dim(1)});
  const double root_norm = tensors[1].norm();
  for (Complex& v : tensors[1].values()) v /= root_norm;

  if (truncation_infidelity) {
    *truncation_infidelity = 1.0 - std::sqrt(std::max(0.0, fidelity_sq));
  }
  TreeTensorNetwork net{topology, std::move(tensors), topology.root()};
  net.check_structure();
  return net;
}

/// Truncates every virtual bond to dimension <= chi. Edges are visited in DFS
/// preorder from the root with the canonical center moved next to each edge
/// first, so each local SVD is globally optimal for its bond; the state is
/// renormalized after every cut. The center returns to its input position.
/// When given, *truncation_infidelity receives 1 - |<in|out>| as implied by
/// the discarded singular values.
inline TreeTensorNetwork truncate_to_chi(const TreeTensorNetwork& in, std::size_t chi,
                                         double* truncation_infidelity = nullptr) {
  if (chi < 1) {
    throw PreconditionError("truncate_to_chi: chi must be at least 1");
  }
  TreeTensorNetwork net = in;
  double fidelity_sq = 1.0;

  // DFS preorder over internal edges: a parent edge comes before every edge
  // of the subtree it leads into.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const auto collect = [&](auto&& self, std::size_t node) -> void {
    for (std::size_t c : {net.topology.left(node), net.topology.right(node)}) {
      if (net.topology.is_internal(c)) {
        edges.push_back({node, c});
        self(self, c);
      }
    }
  };
  collect(collect, net.topology.root());

  for (auto [par, child] : edges) {
    net = set_center(net, par);
    const std::size_t ax = net.topology.axis_toward(par, child);
    const Tensor ap = detail::move_axis(net.tensors[par], ax, 2);
    SvdSplit split = svd_split(ap, {0, 1}, chi);
    fidelity_sq *= 1.0 - split.truncation_error * split.truncation_error;

    Tensor center = split.left;  // (d1, d2, k) with the bond axis fastest
    const std::size_t keep = split.singular_values.size();
    for (std::size_t f = 0; f < center.size(); ++f)
      center[f] *= split.singular_values[f % keep];
    const double cn = center.norm();
    for (Complex& v : center.values()) v /= cn;
    net.tensors[par] = detail::move_axis(center, 2, ax);
    net.tensors[child] = contract(split.right, {1}, net.tensors[child], {0});
  }

  net = set_center(net, in.canonical_center);
  if (truncation_infidelity) {
    *truncation_infidelity = 1.0 - std::sqrt(std::max(0.0, fidelity_sq));
  }
  return net;
}

namespace detail {

/// Contracts the subtree below internal node i. Returns the tensor with axes
/// (parent bond, cluster qubits) and the qubit order of those axes.
inline std::pair<Tensor, std::vector<std::size_t>> contract_subtree(
    const TreeTensorNetwork& net, std::size_t i) {
  const TreeTopology& topo = net.topology;
  const std::size_t cl = topo.left(i), cr = topo.right(i);
  Tensor t = net.tensors[i];  // (p, l, r)
  std::vector<std::size_t> order;

  if (topo.is_internal(cl)) {
    auto [lt, lq] = contract_subtree(net, cl);
    t = contract(t, {1}, lt, {0});  // (p, r, Lq...)
    if (topo.is_internal(cr)) {
      auto [rt, rq] = contract_subtree(net, cr);
      t = contract(t, {1}, rt, {0});  // (p, Lq..., Rq...)
      order = lq;
      order.insert(order.end(), rq.begin(), rq.end());
    } else {
      t = move_axis(t, 1, t.rank() - 1);  // (p, Lq..., r)
      order = lq;
      order.push_back(topo.leaf_qubit(cr));
    }
  } else {
    order.push_back(topo.leaf_qubit(cl));
    if (topo.is_internal(cr)) {
      auto [rt, rq] = contract_subtree(net, cr);
      t = contract(t, {2}, rt, {0});  // (p, l, Rq...)
      order.insert(order.end(), rq.begin(), rq.end());
    } else {
      order.push_back(topo.leaf_qubit(cr));
    }
  }
  return {std::move(t), std::move(order)};
}

}  // namespace detail

/// Contracts the network to a dense 2^N state vector.
inline StateVector to_statevector(const TreeTensorNetwork& net) {
  const std::size_t n = net.qubit_count();
  if (n > 24) {
    throw ResourceError("to_statevector: " + std::to_string(n) +
                        " qubits exceeds the dense bound of 24");
  }
  auto [t, order] = detail::contract_subtree(net, net.topology.root());
  // t axes: (root parent bond of dim 1, qubits in `order`); sort the qubit
  // axes into ascending qubit order, then flatten
  std::vector<std::size_t> pos(n);
  for (std::size_t j = 0; j < order.size(); ++j) pos[order[j]] = j;
  std::vector<std::size_t> perm(n + 1);
  perm[0] = 0;
  for (std::size_t q = 0; q < n; ++q) perm[1 + q] = 1 + pos[q];
  Tensor sorted = t.permuted(perm);
  return std::move(sorted.values());
}

/// <a|b> for networks with identical topology via one bottom-up sweep; no
/// state vectors are formed.
inline Complex inner_product(const TreeTensorNetwork& a, const TreeTensorNetwork& b) {
  if (a.qubit_count() != b.qubit_count()) {
    throw ShapeError("inner_product: qubit counts differ");
  }
  if (!(a.topology == b.topology)) {
    const StateVector va = to_statevector(a);
    const StateVector vb = to_statevector(b);
    Complex s(0.0, 0.0);
    for (std::size_t i = 0; i < va.size(); ++i) s += std::conj(va[i]) * vb[i];
    return s;
  }
  const TreeTopology& topo = a.topology;
  const std::size_t n = topo.qubit_count();
  std::vector<Tensor> env(n);  // env[i] axes: (parent bond of a*, parent bond of b)
  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t cl = topo.left(i), cr = topo.right(i);
    Tensor t = a.tensors[i].conjugated();  // (pa, la, ra)
    if (topo.is_internal(cl)) {
      t = contract(t, {1}, env[cl], {0});  // (pa, ra, lb)
      if (topo.is_internal(cr)) {
        t = contract(t, {1}, env[cr], {0});  // (pa, lb, rb)
        env[i] = contract(t, {1, 2}, b.tensors[i], {1, 2});
      } else {
        env[i] = contract(t, {2, 1}, b.tensors[i], {1, 2});
      }
    } else {
      if (topo.is_internal(cr)) t = contract(t, {2}, env[cr], {0});  // (pa, la, rb)
      env[i] = contract(t, {1, 2}, b.tensors[i], {1, 2});
    }
    if (i == 1) break;
  }
  return env[1].at({0, 0});
}

inline Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) {
    throw ShapeError("inner_product: state dimensions differ");
  }
  Complex s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline Complex inner_product(const TreeTensorNetwork& a, const StateVector& b) {
  return inner_product(to_statevector(a), b);
}

inline Complex inner_product(const StateVector& a, const TreeTensorNetwork& b) {
  return inner_product(a, to_statevector(b));
}

/// 1 - |<a|b>|, clamped at 0 against rounding. Both states must be normalized.
template <class StateA, class StateB>
double infidelity(const StateA& a, const StateB& b) {
  return std::max(0.0, 1.0 - std::abs(inner_product(a, b)));
}

/// Largest deviation from the isometry condition over all non-center tensors:
/// each tensor, reshaped with its center-facing axis as columns, should have
/// orthonormal columns.
inline double max_isometry_deviation(const TreeTensorNetwork& net) {
  double dev = 0.0;
  for (std::size_t i = 1; i <= net.topology.internal_count(); ++i) {
    if (i == net.canonical_center) continue;
    const std::size_t ax = net.topology.axis_toward(i, net.canonical_center);
    const Tensor t = detail::move_axis(net.tensors[i], ax, 2);
    const Eigen::MatrixXcd m = detail::to_matrix(t, 2);
    const Eigen::Index k = m.cols();
    dev = std::max(dev, (m.adjoint() * m - Eigen::MatrixXcd::Identity(k, k))
                            .cwiseAbs()
                            .maxCoeff());
  }
  return dev;
}

/// True when all non-center tensors are isometric toward the center within
/// tol and the global norm is 1 within tol.
inline bool is_canonical(const TreeTensorNetwork& net, double tol = 1e-8) {
  return max_isometry_deviation(net) <= tol && std::abs(net.norm() - 1.0) <= tol;
}

}  // namespace ttncirc
