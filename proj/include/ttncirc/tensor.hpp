// SPDX-License-Identifier: Apache-2.0
//
// Dense complex tensors (row-major storage, last axis fastest) and the
// primitives built on them: pairwise contraction, axis permutation, SVD
// splitting with truncation, completion of isometries to unitaries, and
// fractional powers of unitary matrices.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ttncirc/errors.hpp"

namespace ttncirc {

using Complex = std::complex<double>;

/// Dense N-qubit state: 2^N amplitudes in row-major bit order, qubit 0 is the
/// most significant bit of the amplitude index.
using StateVector = std::vector<Complex>;

/// Sentinel for "no cap" in truncation parameters.
inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

/// Dense complex tensor. Amplitudes are stored row-major: the flat offset of
/// multi-index (i_0, ..., i_{r-1}) is i_{r-1} + d_{r-1} * (i_{r-2} + ...).
/// A rank-0 tensor holds a single scalar.
class Tensor {
 public:
  Tensor() : shape_(), data_(1, Complex(0.0, 0.0)) {}

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), Complex(0.0, 0.0)) {}

  Tensor(std::vector<std::size_t> shape, std::vector<Complex> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != checked_size(shape_)) {
      throw ShapeError("Tensor: data size " + std::to_string(data_.size()) +
                       " does not match product of shape " +
                       std::to_string(checked_size(shape_)));
    }
  }

  static Tensor scalar(Complex value) {
    Tensor t;
    t.data_[0] = value;
    return t;
  }

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  const std::vector<Complex>& values() const { return data_; }
  std::vector<Complex>& values() { return data_; }
  const Complex* data() const { return data_.data(); }
  Complex* data() { return data_.data(); }

  Complex& operator[](std::size_t flat) { return data_[flat]; }
  const Complex& operator[](std::size_t flat) const { return data_[flat]; }

  Complex& at(const std::vector<std::size_t>& idx) { return data_[offset(idx)]; }
  const Complex& at(const std::vector<std::size_t>& idx) const {
    return data_[offset(idx)];
  }

  /// Flat offset of a multi-index.
  std::size_t offset(const std::vector<std::size_t>& idx) const {
    if (idx.size() != shape_.size()) {
      throw ShapeError("Tensor::offset: index rank " + std::to_string(idx.size()) +
                       " vs tensor rank " + std::to_string(shape_.size()));
    }
    std::size_t off = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] >= shape_[a]) {
        throw ShapeError("Tensor::offset: index out of range on axis " +
                         std::to_string(a));
      }
      off = off * shape_[a] + idx[a];
    }
    return off;
  }

  /// New tensor with axes reordered so that output axis a is input axis
  /// order[a].
  Tensor permuted(const std::vector<std::size_t>& order) const {
    if (order.size() != shape_.size()) {
      throw ShapeError("permuted: order has " + std::to_string(order.size()) +
                       " entries for rank-" + std::to_string(shape_.size()) +
                       " tensor");
    }
    std::vector<bool> seen(order.size(), false);
    for (std::size_t a : order) {
      if (a >= order.size() || seen[a]) {
        throw ShapeError("permuted: order is not a permutation");
      }
      seen[a] = true;
    }

    const std::size_t r = shape_.size();
    std::vector<std::size_t> new_shape(r);
    for (std::size_t a = 0; a < r; ++a) new_shape[a] = shape_[order[a]];

    // Strides of the input layout, indexed by output axis.
    std::vector<std::size_t> in_stride(r, 1);
    std::vector<std::size_t> stride(r, 1);
    for (std::size_t a = r; a-- > 1;) stride[a - 1] = stride[a] * shape_[a];
    for (std::size_t a = 0; a < r; ++a) in_stride[a] = stride[order[a]];

    Tensor out(new_shape);
    if (r == 0) {
      out.data_[0] = data_[0];
      return out;
    }
    std::vector<std::size_t> idx(r, 0);
    std::size_t src = 0;
    for (std::size_t flat = 0; flat < data_.size(); ++flat) {
      out.data_[flat] = data_[src];
      // odometer increment over output indices
      for (std::size_t a = r; a-- > 0;) {
        ++idx[a];
        src += in_stride[a];
        if (idx[a] < new_shape[a]) break;
        src -= in_stride[a] * new_shape[a];
        idx[a] = 0;
      }
    }
    return out;
  }

  /// Same data, different shape; the total element count must match.
  Tensor reshaped(std::vector<std::size_t> new_shape) const {
    std::size_t n = 1;
    for (std::size_t d : new_shape) n *= d;
    if (n != data_.size()) {
      throw ShapeError("reshaped: new shape has " + std::to_string(n) +
                       " elements, tensor has " + std::to_string(data_.size()));
    }
    Tensor out;
    out.shape_ = std::move(new_shape);
    out.data_ = data_;
    return out;
  }

  Tensor conjugated() const {
    Tensor out = *this;
    for (Complex& v : out.data_) v = std::conj(v);
    return out;
  }

  Tensor scaled(Complex factor) const {
    Tensor out = *this;
    for (Complex& v : out.data_) v *= factor;
    return out;
  }

  /// Frobenius norm.
  double norm() const {
    double s = 0.0;
    for (const Complex& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

 private:
  static std::size_t checked_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) throw ShapeError("Tensor: axis dimension must be >= 1");
      n *= d;
    }
    return n;
  }

  std::vector<std::size_t> shape_;
  std::vector<Complex> data_;
};

namespace detail {

using RowMajorMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Views the tensor as a matrix whose rows run over the first `left_rank`
/// axes and whose columns run over the rest.
inline Eigen::MatrixXcd to_matrix(const Tensor& t, std::size_t left_rank) {
  std::size_t rows = 1, cols = 1;
  for (std::size_t a = 0; a < t.rank(); ++a) {
    if (a < left_rank) rows *= t.dim(a);
    else cols *= t.dim(a);
  }
  return Eigen::Map<const RowMajorMatrix>(t.data(), static_cast<Eigen::Index>(rows),
                                          static_cast<Eigen::Index>(cols));
}

inline Tensor from_matrix(const Eigen::MatrixXcd& m,
                          std::vector<std::size_t> row_shape,
                          std::vector<std::size_t> col_shape) {
  std::vector<std::size_t> shape = std::move(row_shape);
  shape.insert(shape.end(), col_shape.begin(), col_shape.end());
  Tensor t(shape);
  Eigen::Map<RowMajorMatrix>(t.data(), m.rows(), m.cols()) = m;
  return t;
}

inline void check_axis_list(const Tensor& t, const std::vector<std::size_t>& axes,
                            const char* who) {
  std::vector<bool> seen(t.rank(), false);
  for (std::size_t a : axes) {
    if (a >= t.rank()) {
      throw ShapeError(std::string(who) + ": axis " + std::to_string(a) +
                       " out of range for rank-" + std::to_string(t.rank()) +
                       " tensor");
    }
    if (seen[a]) {
      throw ShapeError(std::string(who) + ": axis " + std::to_string(a) +
                       " listed twice");
    }
    seen[a] = true;
  }
}

}  // namespace detail

/// Contracts `a` and `b` over the paired axes. The result carries a's free
/// axes (in their original order) followed by b's free axes.
inline Tensor contract(const Tensor& a, const std::vector<std::size_t>& axes_a,
                       const Tensor& b, const std::vector<std::size_t>& axes_b) {
  if (axes_a.size() != axes_b.size()) {
    throw ShapeError("contract: " + std::to_string(axes_a.size()) + " axes vs " +
                     std::to_string(axes_b.size()) + " axes");
  }
  detail::check_axis_list(a, axes_a, "contract");
  detail::check_axis_list(b, axes_b, "contract");
  for (std::size_t k = 0; k < axes_a.size(); ++k) {
    if (a.dim(axes_a[k]) != b.dim(axes_b[k])) {
      throw ShapeError("contract: axis " + std::to_string(axes_a[k]) +
                       " of first tensor (dim " + std::to_string(a.dim(axes_a[k])) +
                       ") does not match axis " + std::to_string(axes_b[k]) +
                       " of second tensor (dim " + std::to_string(b.dim(axes_b[k])) +
                       ")");
    }
  }

  std::vector<bool> contracted_a(a.rank(), false), contracted_b(b.rank(), false);
  for (std::size_t x : axes_a) contracted_a[x] = true;
  for (std::size_t x : axes_b) contracted_b[x] = true;

  std::vector<std::size_t> order_a, order_b;
  std::vector<std::size_t> free_dims_a, free_dims_b;
  for (std::size_t x = 0; x < a.rank(); ++x) {
    if (!contracted_a[x]) {
      order_a.push_back(x);
      free_dims_a.push_back(a.dim(x));
    }
  }
  const std::size_t free_rank_a = order_a.size();
  order_a.insert(order_a.end(), axes_a.begin(), axes_a.end());
  order_b.assign(axes_b.begin(), axes_b.end());
  for (std::size_t x = 0; x < b.rank(); ++x) {
    if (!contracted_b[x]) {
      order_b.push_back(x);
      free_dims_b.push_back(b.dim(x));
    }
  }

  const Tensor ap = a.permuted(order_a);
  const Tensor bp = b.permuted(order_b);
  const Eigen::MatrixXcd ma = detail::to_matrix(ap, free_rank_a);
  const Eigen::MatrixXcd mb = detail::to_matrix(bp, axes_b.size());
  return detail::from_matrix(ma * mb, free_dims_a, free_dims_b);
}

/// Result of svd_split. Singular values are not absorbed into either factor;
/// callers choose the absorption side.
struct SvdSplit {
  Tensor left;                          ///< left axes + new bond (last axis)
  std::vector<double> singular_values;  ///< descending, >= 0
  Tensor right;                         ///< new bond (first axis) + right axes
  double truncation_error = 0.0;        ///< relative discarded weight
};

/// Reshapes `t` to a matrix over (left_axes | remaining axes), computes its
/// SVD, discards singular values with s_j/s_0 < rel_tol, and caps the retained
/// count at max_bond. truncation_error is
/// sqrt(sum of squared discarded values) / sqrt(sum of all squared values).
inline SvdSplit svd_split(const Tensor& t, const std::vector<std::size_t>& left_axes,
                          std::size_t max_bond = kUnbounded, double rel_tol = 0.0) {
  if (left_axes.empty() || left_axes.size() >= t.rank()) {
    throw PreconditionError(
        "svd_split: left_axes must be a nonempty proper subset of the axes");
  }
  if (!(rel_tol >= 0.0 && rel_tol < 1.0)) {
    throw PreconditionError("svd_split: rel_tol must lie in [0, 1)");
  }
  if (max_bond == 0) {
    throw PreconditionError("svd_split: max_bond must be positive");
  }
  detail::check_axis_list(t, left_axes, "svd_split");

  std::vector<bool> is_left(t.rank(), false);
  for (std::size_t x : left_axes) is_left[x] = true;
  std::vector<std::size_t> order(left_axes);
  std::vector<std::size_t> left_dims, right_dims;
  for (std::size_t x : left_axes) left_dims.push_back(t.dim(x));
  for (std::size_t x = 0; x < t.rank(); ++x) {
    if (!is_left[x]) {
      order.push_back(x);
      right_dims.push_back(t.dim(x));
    }
  }

  const Tensor tp = t.permuted(order);
  const Eigen::MatrixXcd m = detail::to_matrix(tp, left_axes.size());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();

  const std::size_t n = static_cast<std::size_t>(s.size());
  std::size_t keep = n;
  if (rel_tol > 0.0 && s(0) > 0.0) {
    keep = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (s(static_cast<Eigen::Index>(j)) >= rel_tol * s(0)) ++keep;
    }
  }
  keep = std::max<std::size_t>(1, std::min(keep, std::min(n, max_bond)));

  double kept_sq = 0.0, total_sq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double sj = s(static_cast<Eigen::Index>(j));
    total_sq += sj * sj;
    if (j < keep) kept_sq += sj * sj;
  }
  const double discarded_sq = std::max(0.0, total_sq - kept_sq);
  const double trunc_err =
      total_sq > 0.0 ? std::sqrt(discarded_sq) / std::sqrt(total_sq) : 0.0;

  SvdSplit out;
  out.singular_values.assign(s.data(), s.data() + keep);
  out.truncation_error = trunc_err;
  const Eigen::MatrixXcd u = svd.matrixU().leftCols(static_cast<Eigen::Index>(keep));
  const Eigen::MatrixXcd vh =
      svd.matrixV().leftCols(static_cast<Eigen::Index>(keep)).adjoint();
  out.left = detail::from_matrix(u, left_dims, {keep});
  out.right = detail::from_matrix(vh, {keep}, right_dims);
  return out;
}

/// Extends a d x k isometry (orthonormal columns) to a d x d unitary whose
/// first k columns equal the input exactly. The remaining columns come from
/// Gram-Schmidt over the standard basis in index order; candidates whose
/// residual norm falls below 1e-8 are skipped. Seeded random vectors are the
/// fallback should the standard basis run out numerically.
inline Tensor complete_isometry_to_unitary(const Tensor& v,
                                           unsigned fallback_seed = 0x7751u) {
  if (v.rank() != 2) {
    throw PreconditionError("complete_isometry_to_unitary: expected a rank-2 tensor");
  }
  const std::size_t d = v.dim(0), k = v.dim(1);
  if (k > d) {
    throw PreconditionError("complete_isometry_to_unitary: more columns than rows");
  }
  const Eigen::MatrixXcd m = detail::to_matrix(v, 1);
  const Eigen::MatrixXcd gram = m.adjoint() * m;
  const double dev = (gram - Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(k),
                                                        static_cast<Eigen::Index>(k)))
                         .cwiseAbs()
                         .maxCoeff();
  if (dev > 1e-8) {
    std::ostringstream msg;
    msg << "complete_isometry_to_unitary: input columns are not orthonormal "
           "(max deviation "
        << dev << ")";
    throw PreconditionError(msg.str());
  }

  Eigen::MatrixXcd u(d, d);
  u.leftCols(static_cast<Eigen::Index>(k)) = m;
  std::size_t cols = k;
  std::mt19937 rng(fallback_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t candidate = 0;
  while (cols < d) {
    Eigen::VectorXcd w(d);
    if (candidate < d) {
      w.setZero();
      w(static_cast<Eigen::Index>(candidate)) = Complex(1.0, 0.0);
      ++candidate;
    } else {
      for (std::size_t i = 0; i < d; ++i) w(static_cast<Eigen::Index>(i)) = Complex(gauss(rng), gauss(rng));
    }
    // two Gram-Schmidt passes for orthogonality at machine precision
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < cols; ++c) {
        const Eigen::Index ci = static_cast<Eigen::Index>(c);
        w -= u.col(ci) * (u.col(ci).dot(w));
      }
    }
    const double nrm = w.norm();
    if (nrm <= 1e-8) continue;
    u.col(static_cast<Eigen::Index>(cols)) = w / nrm;
    ++cols;
  }
  return detail::from_matrix(u, {d}, {d});
}

/// Principal-branch fractional power of a d x d unitary: eigenphases are taken
/// in (-pi, pi] and scaled by r. r = 0 yields the identity, r = 1 yields w.
/// An eigenvalue at exactly -1 sits on the branch edge; its phase is +pi.
inline Tensor unitary_fractional_power(const Tensor& w, double r) {
  if (w.rank() != 2 || w.dim(0) != w.dim(1)) {
    throw PreconditionError("unitary_fractional_power: expected a square matrix");
  }
  if (!(r >= 0.0 && r <= 1.0)) {
    throw PreconditionError("unitary_fractional_power: r must lie in [0, 1]");
  }
  const std::size_t d = w.dim(0);
  const Eigen::MatrixXcd m = detail::to_matrix(w, 1);
  const double dev =
      (m.adjoint() * m -
       Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)))
          .cwiseAbs()
          .maxCoeff();
  if (dev > 1e-8) {
    std::ostringstream msg;
    msg << "unitary_fractional_power: input is not unitary (max deviation " << dev
        << ")";
    throw PreconditionError(msg.str());
  }

  // A unitary is normal, so its complex Schur form is diagonal and the Schur
  // basis is an orthonormal eigenbasis.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(m);
  const Eigen::MatrixXcd& q = schur.matrixU();
  Eigen::VectorXcd powers(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const double theta = std::arg(schur.matrixT()(static_cast<Eigen::Index>(j),
                                                  static_cast<Eigen::Index>(j)));
    powers(static_cast<Eigen::Index>(j)) = std::polar(1.0, r * theta);
  }
  const Eigen::MatrixXcd out = q * powers.asDiagonal() * q.adjoint();
  return detail::from_matrix(out, {d}, {d});
}

}  // namespace ttncirc
