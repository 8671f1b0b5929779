// SPDX-License-Identifier: Apache-2.0
//
// Rooted binary tree topologies over qubits: caterpillar chains (MPS),
// balanced trees, and 2D-lattice bisection trees.
#pragma once

#include <cstddef>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "ttncirc/errors.hpp"

namespace ttncirc {

/// Rooted binary tree over N qubits. Internal nodes carry ids 1..N-1 in BFS
/// order from the root (the root is id 1); leaves carry ids N..2N-1, also in
/// BFS order. Id 0 means "no node". Every internal node has exactly two
/// children; every leaf stands for one qubit.
class TreeTopology {
 public:
  static constexpr std::size_t kNone = 0;

  /// parent/left/right are indexed by node id (entry 0 unused, kNone where a
  /// link is absent); leaf_to_qubit is indexed by (leaf id - N).
  TreeTopology(std::size_t qubit_count, std::vector<std::size_t> parent,
               std::vector<std::size_t> left, std::vector<std::size_t> right,
               std::vector<std::size_t> leaf_to_qubit)
      : n_(qubit_count),
        parent_(std::move(parent)),
        left_(std::move(left)),
        right_(std::move(right)),
        leaf_qubit_(std::move(leaf_to_qubit)) {
    validate();
  }

  std::size_t qubit_count() const { return n_; }
  std::size_t internal_count() const { return n_ - 1; }
  std::size_t node_count() const { return 2 * n_ - 1; }
  std::size_t root() const { return 1; }

  bool is_internal(std::size_t id) const { return id >= 1 && id <= n_ - 1; }
  bool is_leaf(std::size_t id) const { return id >= n_ && id <= 2 * n_ - 1; }

  std::size_t parent(std::size_t id) const { return parent_[checked(id)]; }
  std::size_t left(std::size_t id) const { return left_[checked(id)]; }
  std::size_t right(std::size_t id) const { return right_[checked(id)]; }

  std::size_t leaf_qubit(std::size_t id) const {
    if (!is_leaf(id)) {
      throw PreconditionError("leaf_qubit: node " + std::to_string(id) +
                              " is not a leaf");
    }
    return leaf_qubit_[id - n_];
  }

  std::size_t qubit_leaf(std::size_t qubit) const {
    if (qubit >= n_) {
      throw PreconditionError("qubit_leaf: qubit " + std::to_string(qubit) +
                              " out of range");
    }
    return qubit_leaf_[qubit];
  }

  /// Qubit of the leftmost leaf below `id` (the qubit itself if `id` is a
  /// leaf). This is the wire that represents the node in circuit layers.
  std::size_t rep_qubit(std::size_t id) const {
    std::size_t v = checked(id);
    while (is_internal(v)) v = left_[v];
    return leaf_qubit(v);
  }

  /// Qubits below `id`, in left-to-right leaf order.
  std::vector<std::size_t> cluster_qubits(std::size_t id) const {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{checked(id)};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (is_leaf(v)) {
        out.push_back(leaf_qubit(v));
      } else {
        stack.push_back(right_[v]);
        stack.push_back(left_[v]);
      }
    }
    return out;
  }

  /// Inclusive node path from a to b through the tree.
  std::vector<std::size_t> path(std::size_t a, std::size_t b) const {
    checked(a);
    checked(b);
    std::vector<std::size_t> up_a;
    std::vector<bool> on_a(node_count() + 1, false);
    for (std::size_t v = a;; v = parent_[v]) {
      up_a.push_back(v);
      on_a[v] = true;
      if (parent_[v] == kNone) break;
    }
    std::vector<std::size_t> up_b;
    std::size_t lca = b;
    for (std::size_t v = b; !on_a[v]; v = parent_[v]) {
      up_b.push_back(v);
      lca = parent_[v];
    }
    std::vector<std::size_t> out;
    for (std::size_t v : up_a) {
      out.push_back(v);
      if (v == lca) break;
    }
    for (std::size_t j = up_b.size(); j-- > 0;) out.push_back(up_b[j]);
    return out;
  }

  /// Which axis of `node` (0 parent, 1 left, 2 right) points toward `target`.
  std::size_t axis_toward(std::size_t node, std::size_t target) const {
    if (!is_internal(node)) {
      throw PreconditionError("axis_toward: node " + std::to_string(node) +
                              " is not internal");
    }
    if (node == checked(target)) {
      throw PreconditionError("axis_toward: node and target coincide");
    }
    for (std::size_t v = target; v != kNone; v = parent_[v]) {
      if (parent_[v] == node) return v == left_[node] ? 1 : 2;
    }
    return 0;
  }

  bool operator==(const TreeTopology& other) const = default;

  /// Chain tree: internal node i has one leaf child (qubit i-1) on the left
  /// and internal node i+1 on the right; the last internal node holds the two
  /// final qubits. Equivalent to an MPS.
  static TreeTopology caterpillar(std::size_t qubit_count) {
    require_at_least_two(qubit_count);
    const std::size_t n = qubit_count;
    std::vector<std::size_t> parent(2 * n, kNone), left(2 * n, kNone),
        right(2 * n, kNone), leaf_qubit(n);
    for (std::size_t i = 1; i <= n - 1; ++i) {
      left[i] = n + (i - 1);
      parent[left[i]] = i;
      right[i] = (i < n - 1) ? i + 1 : 2 * n - 1;
      parent[right[i]] = i;
    }
    for (std::size_t q = 0; q < n; ++q) leaf_qubit[q] = q;
    return TreeTopology(n, std::move(parent), std::move(left), std::move(right),
                        std::move(leaf_qubit));
  }

  /// Perfect binary tree over 2^k qubits via recursive halving of the qubit
  /// ordering; node i has children 2i and 2i+1.
  static TreeTopology balanced(std::size_t qubit_count) {
    require_at_least_two(qubit_count);
    if (!is_power_of_two(qubit_count)) {
      throw PreconditionError("balanced: qubit count " +
                              std::to_string(qubit_count) +
                              " is not a power of two");
    }
    const std::size_t n = qubit_count;
    std::vector<std::size_t> parent(2 * n, kNone), left(2 * n, kNone),
        right(2 * n, kNone), leaf_qubit(n);
    for (std::size_t i = 1; i <= n - 1; ++i) {
      left[i] = 2 * i;
      right[i] = 2 * i + 1;
      parent[2 * i] = i;
      parent[2 * i + 1] = i;
    }
    for (std::size_t q = 0; q < n; ++q) leaf_qubit[q] = q;
    return TreeTopology(n, std::move(parent), std::move(left), std::move(right),
                        std::move(leaf_qubit));
  }

  /// Tree over a rows x cols qubit grid (row-major qubit numbering, both side
  /// lengths powers of two) built by recursive bisection: a block splits along
  /// its longer side, columns first on ties. Respects 2D locality.
  static TreeTopology lattice(std::size_t rows, std::size_t cols) {
    if (!is_power_of_two(rows) || !is_power_of_two(cols)) {
      throw PreconditionError("lattice: side lengths must be powers of two");
    }
    const std::size_t n = rows * cols;
    require_at_least_two(n);
    std::vector<std::size_t> order;
    order.reserve(n);
    bisect(0, 0, rows, cols, cols, order);
    std::vector<std::size_t> parent(2 * n, kNone), left(2 * n, kNone),
        right(2 * n, kNone), leaf_qubit(n);
    for (std::size_t i = 1; i <= n - 1; ++i) {
      left[i] = 2 * i;
      right[i] = 2 * i + 1;
      parent[2 * i] = i;
      parent[2 * i + 1] = i;
    }
    for (std::size_t j = 0; j < n; ++j) leaf_qubit[j] = order[j];
    return TreeTopology(n, std::move(parent), std::move(left), std::move(right),
                        std::move(leaf_qubit));
  }

 private:
  static bool is_power_of_two(std::size_t x) { return x >= 1 && (x & (x - 1)) == 0; }

  static void require_at_least_two(std::size_t n) {
    if (n < 2) {
      throw PreconditionError("topology needs at least 2 qubits");
    }
  }

  static void bisect(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w,
                     std::size_t total_cols, std::vector<std::size_t>& order) {
    if (h == 1 && w == 1) {
      order.push_back(r0 * total_cols + c0);
      return;
    }
    if (w >= h) {
      bisect(r0, c0, h, w / 2, total_cols, order);
      bisect(r0, c0 + w / 2, h, w / 2, total_cols, order);
    } else {
      bisect(r0, c0, h / 2, w, total_cols, order);
      bisect(r0 + h / 2, c0, h / 2, w, total_cols, order);
    }
  }

  std::size_t checked(std::size_t id) const {
    if (id < 1 || id > 2 * n_ - 1) {
      throw PreconditionError("unknown node id " + std::to_string(id));
    }
    return id;
  }

  void validate() {
    require_at_least_two(n_);
    const std::size_t count = 2 * n_;
    if (parent_.size() != count || left_.size() != count || right_.size() != count ||
        leaf_qubit_.size() != n_) {
      throw PreconditionError("TreeTopology: link tables have the wrong size");
    }
    if (parent_[1] != kNone) {
      throw PreconditionError("TreeTopology: node 1 must be the root");
    }
    for (std::size_t id = 1; id <= 2 * n_ - 1; ++id) {
      if (is_internal(id)) {
        if (left_[id] == kNone || right_[id] == kNone) {
          throw PreconditionError("TreeTopology: internal node " +
                                  std::to_string(id) + " lacks a child");
        }
        for (std::size_t c : {left_[id], right_[id]}) {
          if (c < 2 || c > 2 * n_ - 1 || parent_[c] != id) {
            throw PreconditionError(
                "TreeTopology: inconsistent parent link at node " +
                std::to_string(id));
          }
        }
      } else if (left_[id] != kNone || right_[id] != kNone) {
        throw PreconditionError("TreeTopology: leaf " + std::to_string(id) +
                                " has children");
      }
    }
    std::vector<bool> qubit_seen(n_, false);
    for (std::size_t j = 0; j < n_; ++j) {
      if (leaf_qubit_[j] >= n_ || qubit_seen[leaf_qubit_[j]]) {
        throw PreconditionError(
            "TreeTopology: leaf_qubit is not a bijection onto the qubits");
      }
      qubit_seen[leaf_qubit_[j]] = true;
    }
    // ids must follow BFS order from the root, internal nodes first within the
    // numbering (1..N-1) and leaves after (N..2N-1)
    std::queue<std::size_t> bfs;
    bfs.push(1);
    std::size_t next_internal = 1, next_leaf = n_;
    while (!bfs.empty()) {
      const std::size_t v = bfs.front();
      bfs.pop();
      if (is_internal(v)) {
        if (v != next_internal++) {
          throw PreconditionError("TreeTopology: internal ids are not in BFS order");
        }
        bfs.push(left_[v]);
        bfs.push(right_[v]);
      } else if (v != next_leaf++) {
        throw PreconditionError("TreeTopology: leaf ids are not in BFS order");
      }
    }
    if (next_internal != n_ || next_leaf != 2 * n_) {
      throw PreconditionError("TreeTopology: tree does not reach every node");
    }
    qubit_leaf_.assign(n_, kNone);
    for (std::size_t j = 0; j < n_; ++j) qubit_leaf_[leaf_qubit_[j]] = n_ + j;
  }

  std::size_t n_;
  std::vector<std::size_t> parent_, left_, right_;
  std::vector<std::size_t> leaf_qubit_;  // by (leaf id - N)
  std::vector<std::size_t> qubit_leaf_;  // by qubit
};

}  // namespace ttncirc
