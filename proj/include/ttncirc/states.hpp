// SPDX-License-Identifier: Apache-2.0
//
// Target-state construction: the bars-and-stripes uniform superposition and
// ground states of the J1-J2 Heisenberg model on small square lattices via
// Lanczos exact diagonalization.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ttncirc/errors.hpp"
#include "ttncirc/tensor.hpp"

namespace ttncirc {

enum class Boundary { Open, Periodic };

inline std::string boundary_name(Boundary b) {
  return b == Boundary::Open ? "open" : "periodic";
}

inline Boundary parse_boundary(const std::string& name) {
  if (name == "open") return Boundary::Open;
  if (name == "periodic") return Boundary::Periodic;
  throw ConfigError("unknown boundary '" + name + "' (expected open or periodic)");
}

/// Square spin-1/2 lattice with nearest (j1) and diagonal next-nearest (j2)
/// couplings. Site (r, c) is qubit r*cols + c; qubit 0 is the most
/// significant bit of a basis-state index.
struct LatticeSpec {
  std::size_t rows = 4;
  std::size_t cols = 4;
  Boundary boundary = Boundary::Open;
  double j1 = 1.0;
  double j2 = 0.0;
};

namespace detail {

inline void check_site_count(std::size_t sites, const char* where) {
  if (sites < 1) throw PreconditionError(std::string(where) + ": lattice must have at least one site");
  if (sites > 24)
    throw ResourceError(std::string(where) + ": " + std::to_string(sites) +
                        " sites exceed the 24-site dense/iterative bound");
}

}  // namespace detail

/// Uniform superposition over all bar patterns (every row constant) and
/// stripe patterns (every column constant) of a rows x cols binary image,
/// deduplicated, in row-major bit order.
inline StateVector bas_state(std::size_t rows, std::size_t cols) {
  detail::check_site_count(rows * cols, "bas_state");
  const std::size_t n = rows * cols;
  std::set<std::size_t> patterns;
  for (std::size_t mask = 0; mask < (std::size_t{1} << rows); ++mask) {
    std::size_t idx = 0;
    for (std::size_t r = 0; r < rows; ++r)
      if ((mask >> r) & 1u)
        for (std::size_t c = 0; c < cols; ++c) idx |= std::size_t{1} << (n - 1 - (r * cols + c));
    patterns.insert(idx);
  }
  for (std::size_t mask = 0; mask < (std::size_t{1} << cols); ++mask) {
    std::size_t idx = 0;
    for (std::size_t c = 0; c < cols; ++c)
      if ((mask >> c) & 1u)
        for (std::size_t r = 0; r < rows; ++r) idx |= std::size_t{1} << (n - 1 - (r * cols + c));
    patterns.insert(idx);
  }
  StateVector psi(std::size_t{1} << n, Complex(0.0, 0.0));
  const double amp = 1.0 / std::sqrt(static_cast<double>(patterns.size()));
  for (std::size_t idx : patterns) psi[idx] = Complex(amp, 0.0);
  return psi;
}

/// Sum of two-site exchange terms coupling * S_a . S_b, stored as a term
/// list and applied matrix-free. Every term conserves total S^z.
struct SpinHamiltonian {
  struct Term {
    std::size_t a = 0;
    std::size_t b = 0;
    double coupling = 0.0;
  };

  std::size_t site_count = 0;
  std::vector<Term> terms;

  /// out += H in, both of dimension 2^site_count.
  void accumulate(const StateVector& in, StateVector& out) const {
    const std::size_t dim = std::size_t{1} << site_count;
    if (in.size() != dim || out.size() != dim)
      throw ShapeError("SpinHamiltonian: vector dimension does not match 2^site_count");
    for (const Term& t : terms) {
      const std::size_t ma = std::size_t{1} << (site_count - 1 - t.a);
      const std::size_t mb = std::size_t{1} << (site_count - 1 - t.b);
      const double quarter = 0.25 * t.coupling;
      const double half = 0.5 * t.coupling;
      for (std::size_t s = 0; s < dim; ++s) {
        const bool za = (s & ma) != 0;
        const bool zb = (s & mb) != 0;
        if (za == zb) {
          out[s] += quarter * in[s];
        } else {
          out[s] -= quarter * in[s];
          out[s ^ ma ^ mb] += half * in[s];
        }
      }
    }
  }

  StateVector apply(const StateVector& in) const {
    StateVector out(in.size(), Complex(0.0, 0.0));
    accumulate(in, out);
    return out;
  }
};

inline SpinHamiltonian heisenberg_hamiltonian(const LatticeSpec& spec) {
  detail::check_site_count(spec.rows * spec.cols, "heisenberg_hamiltonian");
  const long rows = static_cast<long>(spec.rows);
  const long cols = static_cast<long>(spec.cols);
  std::set<std::pair<std::size_t, std::size_t>> nn, nnn;
  auto add_edge = [&](std::set<std::pair<std::size_t, std::size_t>>& edges, long r, long c,
                      long dr, long dc) {
    // Offsets along a singleton dimension have no distinct neighbor to reach.
    if ((dr != 0 && rows == 1) || (dc != 0 && cols == 1)) return;
    long r2 = r + dr;
    long c2 = c + dc;
    if (spec.boundary == Boundary::Open) {
      if (r2 < 0 || r2 >= rows || c2 < 0 || c2 >= cols) return;
    } else {
      r2 = (r2 % rows + rows) % rows;
      c2 = (c2 % cols + cols) % cols;
    }
    const std::size_t a = static_cast<std::size_t>(r * cols + c);
    const std::size_t b = static_cast<std::size_t>(r2 * cols + c2);
    if (a == b) return;
    edges.insert({std::min(a, b), std::max(a, b)});
  };
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      add_edge(nn, r, c, 0, 1);
      add_edge(nn, r, c, 1, 0);
      add_edge(nnn, r, c, 1, 1);
      add_edge(nnn, r, c, 1, -1);
    }
  SpinHamiltonian h;
  h.site_count = spec.rows * spec.cols;
  for (const auto& [a, b] : nn)
    if (spec.j1 != 0.0) h.terms.push_back({a, b, spec.j1});
  for (const auto& [a, b] : nnn)
    if (spec.j2 != 0.0) h.terms.push_back({a, b, spec.j2});
  return h;
}

struct GroundStateOptions {
  std::size_t max_iterations = 400;
  double residual_tol = 1e-8;
  double degeneracy_tol = 1e-8;
  unsigned seed = 0x5eedu;
};

struct GroundStateResult {
  double energy = 0.0;
  StateVector psi;
  double residual = 0.0;
  bool degenerate = false;
  std::size_t iterations = 0;
};

namespace detail {

/// Basis of the total-S^z = 0 sector (half the bits set); identity mapping
/// over the full space when `restricted` is false.
struct SectorBasis {
  bool restricted = false;
  std::vector<std::size_t> states;         // sector slot -> basis index
  std::vector<std::uint32_t> slot_of;      // basis index -> sector slot
};

inline SectorBasis sector_basis(std::size_t site_count) {
  SectorBasis basis;
  const std::size_t dim = std::size_t{1} << site_count;
  if (site_count % 2 != 0) return basis;  // no S^z = 0 sector; use full space
  basis.restricted = true;
  basis.slot_of.assign(dim, 0);
  const std::size_t half = site_count / 2;
  for (std::size_t s = 0; s < dim; ++s)
    if (std::popcount(s) == static_cast<int>(half)) {
      basis.slot_of[s] = static_cast<std::uint32_t>(basis.states.size());
      basis.states.push_back(s);
    }
  return basis;
}

/// y = H x within the sector (H conserves S^z, so no amplitude leaks out).
inline void sector_matvec(const SpinHamiltonian& h, const SectorBasis& basis,
                          const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  y.setZero(x.size());
  const std::size_t n = h.site_count;
  for (const SpinHamiltonian::Term& t : h.terms) {
    const std::size_t ma = std::size_t{1} << (n - 1 - t.a);
    const std::size_t mb = std::size_t{1} << (n - 1 - t.b);
    const double quarter = 0.25 * t.coupling;
    const double half = 0.5 * t.coupling;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const std::size_t s = basis.restricted ? basis.states[static_cast<std::size_t>(i)]
                                             : static_cast<std::size_t>(i);
      const bool za = (s & ma) != 0;
      const bool zb = (s & mb) != 0;
      if (za == zb) {
        y[i] += quarter * x[i];
      } else {
        y[i] -= quarter * x[i];
        const std::size_t flipped = s ^ ma ^ mb;
        const std::size_t j = basis.restricted ? basis.slot_of[flipped] : flipped;
        y[static_cast<Eigen::Index>(j)] += half * x[i];
      }
    }
  }
}

struct LanczosResult {
  double value = 0.0;
  Eigen::VectorXcd vector;
  std::size_t steps = 0;
};

/// Lowest eigenpair of H restricted to the sector, by Lanczos with full
/// reorthogonalization. `deflate` (optional, unit norm) is projected out of
/// every Krylov vector so the search runs in its orthogonal complement.
inline LanczosResult lanczos_lowest(const SpinHamiltonian& h, const SectorBasis& basis,
                                    std::size_t max_iterations, double residual_tol,
                                    std::mt19937& rng, const Eigen::VectorXcd* deflate) {
  const Eigen::Index dim = basis.restricted
                               ? static_cast<Eigen::Index>(basis.states.size())
                               : static_cast<Eigen::Index>(std::size_t{1} << h.site_count);
  auto project_out = [&](Eigen::VectorXcd& v) {
    if (deflate != nullptr) v -= (deflate->dot(v)) * (*deflate);
  };
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = Complex(gauss(rng), gauss(rng));
  project_out(v);
  if (v.norm() < 1e-12) throw NumericalError("ground_state: degenerate start vector");
  v.normalize();

  std::vector<Eigen::VectorXcd> krylov;
  std::vector<double> alpha, beta;
  Eigen::VectorXcd w(dim);
  const std::size_t steps = std::min<std::size_t>(max_iterations, static_cast<std::size_t>(dim));
  for (std::size_t k = 0; k < steps; ++k) {
    krylov.push_back(v);
    sector_matvec(h, basis, v, w);
    project_out(w);
    alpha.push_back(v.dot(w).real());
    w -= alpha.back() * v;
    if (k > 0) w -= beta.back() * krylov[k - 1];
    for (int pass = 0; pass < 2; ++pass)
      for (const Eigen::VectorXcd& q : krylov) w -= q.dot(w) * q;
    const double b = w.norm();

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k + 1),
                                                static_cast<Eigen::Index>(k + 1));
    for (std::size_t j = 0; j <= k; ++j) {
      tri(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = alpha[j];
      if (j > 0) {
        tri(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j - 1)) = beta[j - 1];
        tri(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(j)) = beta[j - 1];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const Eigen::VectorXd evals = es.eigenvalues();
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    const double estimate = b * std::abs(y[static_cast<Eigen::Index>(k)]);
    if (estimate < 0.1 * residual_tol || b < 1e-14 || k + 1 == steps) {
      Eigen::VectorXcd ritz = Eigen::VectorXcd::Zero(dim);
      for (std::size_t j = 0; j <= k; ++j) ritz += y[static_cast<Eigen::Index>(j)] * krylov[j];
      ritz.normalize();
      return {evals[0], ritz, k + 1};
    }
    beta.push_back(b);
    v = w / b;
  }
  throw NumericalError("ground_state: Lanczos failed to converge");
}

}  // namespace detail

/// Lowest eigenpair of a spin Hamiltonian. Searches the total-S^z = 0 sector
/// when it exists (even site count; H conserves S^z), the full space
/// otherwise, and certifies the result with a full-space residual. A second
/// deflated Lanczos pass estimates the next eigenvalue inside the searched
/// sector to flag a degenerate ground space.
inline GroundStateResult ground_state(const SpinHamiltonian& h, const GroundStateOptions& opt = {}) {
  detail::check_site_count(h.site_count, "ground_state");
  if (opt.max_iterations < 1) throw PreconditionError("ground_state: max_iterations must be >= 1");
  const std::size_t dim = std::size_t{1} << h.site_count;
  std::mt19937 rng(opt.seed);
  const detail::SectorBasis basis = detail::sector_basis(h.site_count);
  const detail::LanczosResult lowest =
      detail::lanczos_lowest(h, basis, opt.max_iterations, opt.residual_tol, rng, nullptr);

  GroundStateResult result;
  result.energy = lowest.value;
  result.iterations = lowest.steps;
  result.psi.assign(dim, Complex(0.0, 0.0));
  if (basis.restricted) {
    for (std::size_t i = 0; i < basis.states.size(); ++i)
      result.psi[basis.states[i]] = lowest.vector[static_cast<Eigen::Index>(i)];
  } else {
    for (std::size_t i = 0; i < dim; ++i) result.psi[i] = lowest.vector[static_cast<Eigen::Index>(i)];
  }

  const StateVector h_psi = h.apply(result.psi);
  double res2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) res2 += std::norm(h_psi[i] - result.energy * result.psi[i]);
  result.residual = std::sqrt(res2);
  if (!(result.residual < opt.residual_tol))
    throw NumericalError("ground_state: residual " + std::to_string(result.residual) +
                         " above tolerance after configured iterations");

  if (lowest.vector.size() > 1) {
    const detail::LanczosResult next = detail::lanczos_lowest(
        h, basis, opt.max_iterations, opt.residual_tol, rng, &lowest.vector);
    result.degenerate =
        next.value - result.energy < opt.degeneracy_tol * std::max(1.0, std::abs(result.energy));
  }
  return result;
}

}  // namespace ttncirc
