// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "oracles.hpp"
#include "ttncirc/tensor.hpp"

using ttncirc::Complex;
using ttncirc::contract;
using ttncirc::PreconditionError;
using ttncirc::ShapeError;
using ttncirc::svd_split;
using ttncirc::Tensor;

namespace {

Tensor identity2() {
  Tensor t({2, 2});
  t[0] = 1.0;
  t[3] = 1.0;
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("contract: identity times vector returns the vector", "[tensor]") {
  Tensor v({2}, {Complex(0.3, -0.1), Complex(-0.7, 2.0)});
  Tensor r = contract(identity2(), {1}, v, {0});
  REQUIRE(r.shape() == std::vector<std::size_t>{2});
  CHECK(std::abs(r[0] - v[0]) < 1e-15);
  CHECK(std::abs(r[1] - v[1]) < 1e-15);
}

TEST_CASE("contract: inner product of a vector with its conjugate", "[tensor]") {
  Tensor u({3}, {Complex(1.0, 2.0), Complex(0.0, -1.0), Complex(2.0, 0.5)});
  Tensor r = contract(u, {0}, u.conjugated(), {0});
  REQUIRE(r.rank() == 0);
  const double norm_sq = 1.0 + 4.0 + 1.0 + 4.0 + 0.25;
  CHECK(std::abs(r[0] - Complex(norm_sq, 0.0)) < 1e-14);
}

TEST_CASE("contract: matrix product matches triple-loop oracle", "[tensor]") {
  std::mt19937 rng(42);
  Tensor a = oracles::random_tensor({2, 3}, rng);
  Tensor b = oracles::random_tensor({3, 4}, rng);
  Tensor got = contract(a, {1}, b, {0});
  // brute-force triple loop
  Tensor want({2, 4});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      Complex s(0, 0);
      for (std::size_t k = 0; k < 3; ++k) s += a.at({i, k}) * b.at({k, j});
      want.at({i, j}) = s;
    }
  CHECK(max_abs_diff(got, want) < 1e-13);
}

TEST_CASE("contract: multi-axis agrees with loop oracle", "[tensor]") {
  std::mt19937 rng(7);
  for (int it = 0; it < 10; ++it) {
    Tensor a = oracles::random_tensor({2, 3, 4, 2}, rng);
    Tensor b = oracles::random_tensor({4, 2, 5}, rng);
    Tensor got = contract(a, {2, 3}, b, {0, 1});
    Tensor want = oracles::contract_loops(a, {2, 3}, b, {0, 1});
    CHECK(max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("contract: free axis order is a's axes then b's axes", "[tensor]") {
  std::mt19937 rng(3);
  Tensor a = oracles::random_tensor({2, 5, 3}, rng);
  Tensor b = oracles::random_tensor({3, 7}, rng);
  Tensor r = contract(a, {2}, b, {0});
  REQUIRE(r.shape() == std::vector<std::size_t>({2, 5, 7}));
}

TEST_CASE("contract: bilinearity on random instances", "[tensor]") {
  std::mt19937 rng(11);
  for (int it = 0; it < 8; ++it) {
    Tensor a1 = oracles::random_tensor({3, 4}, rng);
    Tensor a2 = oracles::random_tensor({3, 4}, rng);
    Tensor b = oracles::random_tensor({4, 3}, rng);
    const Complex alpha(0.3, -1.1), beta(-0.2, 0.7);
    Tensor lhs_arg({3, 4});
    for (std::size_t i = 0; i < lhs_arg.size(); ++i)
      lhs_arg[i] = alpha * a1[i] + beta * a2[i];
    Tensor lhs = contract(lhs_arg, {1, 0}, b, {0, 1});
    Tensor r1 = contract(a1, {1, 0}, b, {0, 1});
    Tensor r2 = contract(a2, {1, 0}, b, {0, 1});
    CHECK(std::abs(lhs[0] - (alpha * r1[0] + beta * r2[0])) < 1e-12);
  }
}

TEST_CASE("contract: dimension mismatch names both axes", "[tensor]") {
  Tensor a({2, 3});
  Tensor b({4, 2});
  try {
    contract(a, {1}, b, {0});
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("axis 1") != std::string::npos);
    CHECK(msg.find("axis 0") != std::string::npos);
  }
}

TEST_CASE("permute round trip", "[tensor]") {
  std::mt19937 rng(5);
  Tensor a = oracles::random_tensor({2, 3, 4}, rng);
  Tensor p = a.permuted({2, 0, 1});
  REQUIRE(p.shape() == std::vector<std::size_t>({4, 2, 3}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k)
        CHECK(p.at({k, i, j}) == a.at({i, j, k}));
}

TEST_CASE("svd_split: rank-1 product tensor keeps one singular value", "[tensor]") {
  std::mt19937 rng(13);
  Tensor u = oracles::random_tensor({2, 2}, rng);
  Tensor v = oracles::random_tensor({2, 2}, rng);
  Tensor prod = contract(u, {}, v, {});  // outer product, shape (2,2,2,2)
  auto split = svd_split(prod, {0, 1});
  std::size_t significant = 0;
  for (double s : split.singular_values)
    if (s > 1e-12 * split.singular_values[0]) ++significant;
  CHECK(significant == 1);
  CHECK(split.truncation_error == 0.0);
}

TEST_CASE("svd_split: GHZ-4 across 2|2 has two equal Schmidt values", "[tensor]") {
  Tensor ghz({2, 2, 2, 2});
  ghz[0] = Complex(1.0 / std::sqrt(2.0), 0.0);
  ghz[15] = Complex(1.0 / std::sqrt(2.0), 0.0);

  // oracle: explicit 4x4 SVD of the reshaped amplitudes
  Eigen::MatrixXcd m(4, 4);
  m.setZero();
  m(0, 0) = Complex(1.0 / std::sqrt(2.0), 0.0);
  m(3, 3) = Complex(1.0 / std::sqrt(2.0), 0.0);
  Eigen::JacobiSVD<Eigen::MatrixXcd> oracle(m);
  std::size_t oracle_rank = 0;
  for (Eigen::Index i = 0; i < 4; ++i)
    if (oracle.singularValues()(i) > 1e-12) ++oracle_rank;
  REQUIRE(oracle_rank == 2);

  auto split = svd_split(ghz, {0, 1});
  std::size_t nonzero = 0;
  for (double s : split.singular_values)
    if (s > 1e-12) ++nonzero;
  CHECK(nonzero == 2);
  CHECK(split.singular_values[0] == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
  CHECK(split.singular_values[1] == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("svd_split: truncation error matches full SVD oracle", "[tensor]") {
  std::mt19937 rng(17);
  Tensor t = oracles::random_tensor({2, 2, 2, 2}, rng);
  const Eigen::MatrixXcd m =
      ttncirc::detail::to_matrix(t.permuted({0, 1, 2, 3}), 2);
  Eigen::JacobiSVD<Eigen::MatrixXcd> oracle(m);
  const Eigen::VectorXd s = oracle.singularValues();
  double disc = 0.0, tot = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    tot += s(j) * s(j);
    if (j >= 2) disc += s(j) * s(j);
  }
  const double want = std::sqrt(disc) / std::sqrt(tot);

  auto split = svd_split(t, {0, 1}, 2);
  CHECK(split.truncation_error == Catch::Approx(want).margin(1e-12));
  CHECK(split.singular_values.size() == 2);
}

TEST_CASE("svd_split: unbounded split reconstructs the input", "[tensor]") {
  std::mt19937 rng(19);
  for (int it = 0; it < 6; ++it) {
    Tensor t = oracles::random_tensor({3, 2, 4}, rng);
    auto split = svd_split(t, {1, 0});
    // rebuild: left axes were (1, 0), so reconstruct and permute back
    Tensor sv = split.right;
    for (std::size_t r = 0; r < split.singular_values.size(); ++r) {
      const std::size_t cols = sv.size() / split.singular_values.size();
      for (std::size_t c = 0; c < cols; ++c)
        sv[r * cols + c] *= split.singular_values[r];
    }
    Tensor rebuilt = contract(split.left, {2}, sv, {0});  // axes (1,0,4)->(1,0,4)
    Tensor want = t.permuted({1, 0, 2});
    CHECK(max_abs_diff(rebuilt, want) < 1e-10);
  }
}

TEST_CASE("svd_split: orthonormal factors", "[tensor]") {
  std::mt19937 rng(23);
  Tensor t = oracles::random_tensor({4, 3, 5}, rng);
  auto split = svd_split(t, {0});
  const Eigen::MatrixXcd l = ttncirc::detail::to_matrix(split.left, 1);
  const Eigen::MatrixXcd r = ttncirc::detail::to_matrix(split.right, 1);
  const auto k = l.cols();
  CHECK((l.adjoint() * l - Eigen::MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK((r * r.adjoint() - Eigen::MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("svd_split: argument validation", "[tensor]") {
  Tensor t({2, 2});
  CHECK_THROWS_AS(svd_split(t, {}), PreconditionError);
  CHECK_THROWS_AS(svd_split(t, {0, 1}), PreconditionError);
  CHECK_THROWS_AS(svd_split(t, {0}, ttncirc::kUnbounded, 1.5), PreconditionError);
}

TEST_CASE("complete_isometry_to_unitary: identity columns extend to identity",
          "[tensor]") {
  Tensor v({4, 2});
  v.at({0, 0}) = 1.0;
  v.at({1, 1}) = 1.0;
  Tensor u = ttncirc::complete_isometry_to_unitary(v);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::abs(u.at({i, j}) - (i == j ? Complex(1, 0) : Complex(0, 0))) <
            1e-14);
}

TEST_CASE("complete_isometry_to_unitary: single column", "[tensor]") {
  std::mt19937 rng(29);
  Tensor v = oracles::random_isometry_tensor(4, 1, rng);
  Tensor u = ttncirc::complete_isometry_to_unitary(v);
  const Eigen::MatrixXcd m = ttncirc::detail::to_matrix(u, 1);
  CHECK((m.adjoint() * m - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-12);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(u.at({i, 0}) - v.at({i, 0})) == 0.0);
}

TEST_CASE("complete_isometry_to_unitary: random isometries", "[tensor]") {
  std::mt19937 rng(31);
  for (int it = 0; it < 10; ++it) {
    Tensor v = oracles::random_isometry_tensor(4, 2, rng);
    Tensor u = ttncirc::complete_isometry_to_unitary(v);
    const Eigen::MatrixXcd m = ttncirc::detail::to_matrix(u, 1);
    CHECK((m.adjoint() * m - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((m * m.adjoint() - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-10);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(u.at({i, j}) - v.at({i, j})) == 0.0);
  }
}

TEST_CASE("complete_isometry_to_unitary: rejects non-orthonormal input",
          "[tensor]") {
  Tensor v({4, 2});
  v.at({0, 0}) = 1.0;
  v.at({0, 1}) = 1.0;  // same direction twice
  try {
    ttncirc::complete_isometry_to_unitary(v);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("deviation") != std::string::npos);
  }
}

TEST_CASE("unitary_fractional_power: identity stays identity", "[tensor]") {
  Tensor w({2, 2});
  w.at({0, 0}) = 1.0;
  w.at({1, 1}) = 1.0;
  Tensor p = ttncirc::unitary_fractional_power(w, 0.37);
  CHECK(std::abs(p.at({0, 0}) - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(p.at({1, 1}) - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(p.at({0, 1})) < 1e-12);
}

TEST_CASE("unitary_fractional_power: principal branch on diag(1, i)", "[tensor]") {
  Tensor w({2, 2});
  w.at({0, 0}) = Complex(1, 0);
  w.at({1, 1}) = Complex(0, 1);
  Tensor p = ttncirc::unitary_fractional_power(w, 0.5);
  CHECK(std::abs(p.at({0, 0}) - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(p.at({1, 1}) - std::polar(1.0, M_PI / 4)) < 1e-12);
}

TEST_CASE("unitary_fractional_power: semigroup identity on random unitaries",
          "[tensor]") {
  std::mt19937 rng(37);
  for (int it = 0; it < 6; ++it) {
    Tensor w = oracles::random_unitary_tensor(4, rng);
    Tensor p6 = ttncirc::unitary_fractional_power(w, 0.6);
    Tensor p4 = ttncirc::unitary_fractional_power(w, 0.4);
    Tensor prod = contract(p6, {1}, p4, {0});
    CHECK(max_abs_diff(prod, w) < 1e-10);
    // commutes with w
    Tensor pw = contract(p6, {1}, w, {0});
    Tensor wp = contract(w, {1}, p6, {0});
    CHECK(max_abs_diff(pw, wp) < 1e-10);
  }
}

TEST_CASE("unitary_fractional_power: endpoints and unitarity", "[tensor]") {
  std::mt19937 rng(41);
  Tensor w = oracles::random_unitary_tensor(4, rng);
  Tensor p0 = ttncirc::unitary_fractional_power(w, 0.0);
  Tensor p1 = ttncirc::unitary_fractional_power(w, 1.0);
  Tensor id({4, 4});
  for (std::size_t i = 0; i < 4; ++i) id.at({i, i}) = 1.0;
  CHECK(max_abs_diff(p0, id) < 1e-10);
  CHECK(max_abs_diff(p1, w) < 1e-10);
  Tensor p = ttncirc::unitary_fractional_power(w, 0.73);
  const Eigen::MatrixXcd m = ttncirc::detail::to_matrix(p, 1);
  CHECK((m.adjoint() * m - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("unitary_fractional_power: rejects non-unitary input", "[tensor]") {
  Tensor w({2, 2});
  w.at({0, 0}) = 2.0;
  w.at({1, 1}) = 1.0;
  CHECK_THROWS_AS(ttncirc::unitary_fractional_power(w, 0.5), PreconditionError);
}

TEST_CASE("unitary_fractional_power: eigenvalues are principal powers",
          "[tensor]") {
  std::mt19937 rng(43);
  Tensor w = oracles::random_unitary_tensor(4, rng);
  const double r = 0.31;
  Tensor p = ttncirc::unitary_fractional_power(w, r);
  const Eigen::MatrixXcd wm = ttncirc::detail::to_matrix(w, 1);
  const Eigen::MatrixXcd pm = ttncirc::detail::to_matrix(p, 1);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ew(wm);
  // each eigenvector of w maps to eigenvalue^r under p
  for (Eigen::Index j = 0; j < 4; ++j) {
    const Eigen::VectorXcd vec = ew.eigenvectors().col(j);
    const Complex lam = ew.eigenvalues()(j);
    const Complex want = std::polar(1.0, r * std::arg(lam));
    CHECK((pm * vec - want * vec).norm() < 1e-8);
  }
}
