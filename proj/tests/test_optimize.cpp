// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ttncirc/circuit.hpp"
#include "ttncirc/network.hpp"
#include "ttncirc/optimize.hpp"
#include "ttncirc/topology.hpp"

using ttncirc::Complex;
using ttncirc::ConfigError;
using ttncirc::EmbedMethod;
using ttncirc::EmbedReport;
using ttncirc::Gate;
using ttncirc::GateLayer;
using ttncirc::LayeredCircuit;
using ttncirc::PreconditionError;
using ttncirc::StateVector;
using ttncirc::SweepConfig;
using ttncirc::Tensor;
using ttncirc::TreeTensorNetwork;
using ttncirc::TreeTopology;

namespace {

LayeredCircuit random_circuit(const TreeTopology& topo, std::size_t depth,
                              std::mt19937& rng) {
  LayeredCircuit c;
  c.qubit_count = topo.qubit_count();
  for (std::size_t k = 0; k < depth; ++k)
    c.layers.push_back(oracles::random_layer(topo, rng));
  return c;
}

double dense_overlap(const StateVector& target, const LayeredCircuit& circuit) {
  const StateVector state =
      oracles::apply_circuit_dense(circuit, ttncirc::zero_state(circuit.qubit_count));
  return std::abs(oracles::dot(target, state));
}

Tensor tensor_from(const Eigen::MatrixXcd& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t.at({static_cast<std::size_t>(r), static_cast<std::size_t>(c)}) = m(r, c);
  return t;
}

}  // namespace

TEST_CASE("environment: pairing equals the dense overlap", "[optimize]") {
  std::mt19937 rng(3);
  const TreeTopology topo = TreeTopology::caterpillar(6);
  const StateVector target = oracles::random_state(6, rng);
  const LayeredCircuit circuit = random_circuit(topo, 2, rng);

  const Complex direct = oracles::dot(
      target, oracles::apply_circuit_dense(circuit, ttncirc::zero_state(6)));
  for (const std::size_t k : {std::size_t{0}, std::size_t{1}}) {
    for (const std::size_t node : {std::size_t{1}, std::size_t{3}, std::size_t{5}}) {
      const Tensor e = ttncirc::environment(target, circuit, k, node);
      std::size_t pos = 0;
      while (circuit.layers[k].gates[pos].node_id != node) ++pos;
      const Complex paired =
          ttncirc::pairing(e, circuit.layers[k].gates[pos].unitary);
      CHECK(std::abs(paired - direct) < 1e-10);
    }
  }
}

TEST_CASE("environment: single-gate circuit recovers its own gate", "[optimize]") {
  std::mt19937 rng(7);
  const TreeTopology topo = TreeTopology::caterpillar(2);
  LayeredCircuit circuit;
  circuit.qubit_count = 2;
  circuit.layers.push_back(oracles::random_layer(topo, rng));
  const Gate& g = circuit.layers[0].gates[0];

  const StateVector target =
      oracles::apply_circuit_dense(circuit, ttncirc::zero_state(2));
  const Tensor e = ttncirc::environment(target, circuit, 0, 1);
  CHECK(std::abs(ttncirc::pairing(e, g.unitary) - Complex(1.0, 0.0)) < 1e-10);

  const auto [u_new, best] = ttncirc::svd_update(e);
  CHECK(best == Catch::Approx(1.0).margin(1e-10));
  CHECK(std::abs(ttncirc::pairing(e, u_new) - Complex(best, 0.0)) < 1e-10);
}

TEST_CASE("environment: identity circuit with zero target prefers identity",
          "[optimize]") {
  const TreeTopology topo = TreeTopology::balanced(4);
  LayeredCircuit circuit;
  circuit.qubit_count = 4;
  circuit.layers.push_back(ttncirc::identity_layer(topo));
  const Tensor e = ttncirc::environment(ttncirc::zero_state(4), circuit, 0, 2);

  Tensor id({4, 4});
  for (std::size_t j = 0; j < 4; ++j) id.at({j, j}) = Complex(1.0, 0.0);
  const auto [u_new, best] = ttncirc::svd_update(e);
  CHECK(std::abs(ttncirc::pairing(e, id)) == Catch::Approx(best).margin(1e-10));
}

TEST_CASE("environment: pairing is linear in the gate", "[optimize]") {
  std::mt19937 rng(13);
  const TreeTopology topo = TreeTopology::balanced(4);
  const StateVector target = oracles::random_state(4, rng);
  const LayeredCircuit circuit = random_circuit(topo, 2, rng);
  const Tensor e = ttncirc::environment(target, circuit, 1, 3);

  const Tensor g1 = oracles::random_tensor({4, 4}, rng);
  const Tensor g2 = oracles::random_tensor({4, 4}, rng);
  const Complex a(0.3, -1.1), b(-0.7, 0.2);
  Tensor combo({4, 4});
  for (std::size_t f = 0; f < 16; ++f) combo[f] = a * g1[f] + b * g2[f];
  const Complex lhs = ttncirc::pairing(e, combo);
  const Complex rhs = a * ttncirc::pairing(e, g1) + b * ttncirc::pairing(e, g2);
  CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("environment: rejects bad addresses", "[optimize]") {
  std::mt19937 rng(17);
  const TreeTopology topo = TreeTopology::balanced(4);
  const LayeredCircuit circuit = random_circuit(topo, 1, rng);
  const StateVector target = oracles::random_state(4, rng);
  CHECK_THROWS_AS(ttncirc::environment(target, circuit, 1, 1), PreconditionError);
  CHECK_THROWS_AS(ttncirc::environment(target, circuit, 0, 9), PreconditionError);
}

TEST_CASE("svd_update: known environments", "[optimize]") {
  std::mt19937 rng(19);

  const Tensor w = oracles::random_unitary_tensor(4, rng);
  const auto [u_w, s_w] = ttncirc::svd_update(w);
  double worst = 0.0;
  for (std::size_t f = 0; f < 16; ++f)
    worst = std::max(worst, std::abs(u_w[f] - w[f]));
  CHECK(worst < 1e-10);
  CHECK(s_w == Catch::Approx(4.0).margin(1e-10));

  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
  d(0, 0) = 2.0; d(1, 1) = 1.0; d(2, 2) = 1.0; d(3, 3) = 0.5;
  const auto [u_d, s_d] = ttncirc::svd_update(tensor_from(d));
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      CHECK(std::abs(u_d.at({r, c}) - (r == c ? Complex(1, 0) : Complex(0, 0))) <
            1e-10);
  CHECK(s_d == Catch::Approx(4.5).margin(1e-10));

  const auto [u_z, s_z] = ttncirc::svd_update(Tensor({4, 4}));
  CHECK(s_z == 0.0);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(u_z.at({j, j}) == Complex(1.0, 0.0));
}

TEST_CASE("svd_update: no unitary pairs higher", "[optimize]") {
  std::mt19937 rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    const Tensor e = oracles::random_tensor({4, 4}, rng);
    const auto [u_new, best] = ttncirc::svd_update(e);
    CHECK(std::abs(ttncirc::pairing(e, u_new) - Complex(best, 0.0)) < 1e-10);
    for (int w = 0; w < 200; ++w) {
      const Tensor cand = oracles::random_unitary_tensor(4, rng);
      CHECK(std::abs(ttncirc::pairing(e, cand)) <= best + 1e-10);
    }
  }
}

TEST_CASE("per-gate updates never lower the overlap at r = 1", "[optimize]") {
  std::mt19937 rng(29);
  const TreeTopology topo = TreeTopology::balanced(8);
  const StateVector target = oracles::random_state(8, rng);
  LayeredCircuit circuit = random_circuit(topo, 2, rng);

  double prev = dense_overlap(target, circuit);
  for (std::size_t k = 0; k < circuit.layers.size(); ++k) {
    for (std::size_t m = 0; m < circuit.layers[k].gates.size(); ++m) {
      const Gate& g = circuit.layers[k].gates[m];
      const Tensor e = ttncirc::environment(target, circuit, k, g.node_id);
      const auto [u_new, predicted] = ttncirc::svd_update(e);
      circuit.layers[k].gates[m].unitary = u_new;

      const double now = dense_overlap(target, circuit);
      CHECK(now == Catch::Approx(predicted).margin(1e-10));
      CHECK(now >= prev - 1e-9);
      prev = now;
    }
  }
}

TEST_CASE("sweep_optimize: a circuit is a fixed point for its own state",
          "[optimize]") {
  std::mt19937 rng(31);
  const TreeTopology topo = TreeTopology::caterpillar(6);
  const LayeredCircuit circuit = random_circuit(topo, 2, rng);
  const StateVector target =
      oracles::apply_circuit_dense(circuit, ttncirc::zero_state(6));

  SweepConfig cfg;
  cfg.sweeps = 3;
  cfg.convergence_tol = 0.0;
  const auto result = ttncirc::sweep_optimize(circuit, target, cfg);
  REQUIRE(result.overlaps.size() == 3);
  for (const double ov : result.overlaps)
    CHECK(ov == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("sweep_optimize: r = 0 leaves the circuit unchanged", "[optimize]") {
  std::mt19937 rng(37);
  const TreeTopology topo = TreeTopology::balanced(4);
  const LayeredCircuit circuit = random_circuit(topo, 2, rng);
  const StateVector target = oracles::random_state(4, rng);

  SweepConfig cfg;
  cfg.sweeps = 2;
  cfg.learning_rate = 0.0;
  cfg.convergence_tol = 0.0;
  const auto result = ttncirc::sweep_optimize(circuit, target, cfg);
  for (std::size_t k = 0; k < circuit.layers.size(); ++k)
    for (std::size_t m = 0; m < circuit.layers[k].gates.size(); ++m) {
      const Tensor& before = circuit.layers[k].gates[m].unitary;
      const Tensor& after = result.circuit.layers[k].gates[m].unitary;
      for (std::size_t f = 0; f < 16; ++f)
        CHECK(std::abs(before[f] - after[f]) < 1e-12);
    }
}

TEST_CASE("sweep_optimize: identity layers are a GHZ-8 fixed point", "[optimize]") {
  // From an all-identity start against GHZ, every single-gate maximizer must
  // keep |00> -> |00> (the environment is rank one with singular value
  // 1/sqrt(2)), so the forward state never leaves |0^N> and the sweep stalls
  // at overlap 1/sqrt(2) for any learning rate. This is the identity-seeded
  // failure mode the iterative decomposition seeding is designed to avoid.
  const std::size_t n = 8;
  StateVector ghz(std::size_t{1} << n, Complex(0.0, 0.0));
  ghz.front() = Complex(1.0 / std::sqrt(2.0), 0.0);
  ghz.back() = Complex(1.0 / std::sqrt(2.0), 0.0);

  const TreeTopology topo = TreeTopology::balanced(n);
  LayeredCircuit circuit;
  circuit.qubit_count = n;
  circuit.layers.push_back(ttncirc::identity_layer(topo));
  circuit.layers.push_back(ttncirc::identity_layer(topo));

  SweepConfig cfg;
  cfg.sweeps = 50;
  cfg.learning_rate = 1.0;
  cfg.convergence_tol = 0.0;
  const auto result = ttncirc::sweep_optimize(circuit, ghz, cfg);
  for (const double ov : result.overlaps)
    CHECK(ov == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-9));
}

TEST_CASE("sweep_optimize: converges to GHZ-8 from a seeded start", "[optimize]") {
  std::mt19937 rng(97);
  const std::size_t n = 8;
  StateVector ghz(std::size_t{1} << n, Complex(0.0, 0.0));
  ghz.front() = Complex(1.0 / std::sqrt(2.0), 0.0);
  ghz.back() = Complex(1.0 / std::sqrt(2.0), 0.0);

  // Seed the first layer from a perturbed copy of the target so the start is
  // inside the basin of attraction but well away from the solution.
  StateVector seed_state = ghz;
  const StateVector noise = oracles::random_state(n, rng);
  for (std::size_t x = 0; x < seed_state.size(); ++x)
    seed_state[x] += 0.2 * noise[x];
  double nrm = 0.0;
  for (const Complex& a : seed_state) nrm += std::norm(a);
  for (Complex& a : seed_state) a /= std::sqrt(nrm);

  const TreeTopology topo = TreeTopology::balanced(n);
  const TreeTensorNetwork seed_net =
      ttncirc::from_statevector(seed_state, topo, 2);
  LayeredCircuit circuit;
  circuit.qubit_count = n;
  circuit.layers.push_back(ttncirc::layer_from_chi2(seed_net));
  circuit.layers.push_back(ttncirc::identity_layer(topo));

  SweepConfig cfg;
  cfg.sweeps = 50;
  cfg.learning_rate = 1.0;
  cfg.convergence_tol = 0.0;
  const auto result = ttncirc::sweep_optimize(circuit, ghz, cfg);
  CHECK(1.0 - result.overlaps.back() < 1e-6);
}

TEST_CASE("sweep_optimize: early stop cuts converged runs short", "[optimize]") {
  std::mt19937 rng(41);
  const TreeTopology topo = TreeTopology::caterpillar(4);
  const LayeredCircuit circuit = random_circuit(topo, 1, rng);
  const StateVector target =
      oracles::apply_circuit_dense(circuit, ttncirc::zero_state(4));

  SweepConfig cfg;
  cfg.sweeps = 50;
  cfg.convergence_tol = 1e-12;
  const auto result = ttncirc::sweep_optimize(circuit, target, cfg);
  CHECK(result.overlaps.size() < 50);
}

TEST_CASE("sweep_optimize: validates configuration", "[optimize]") {
  std::mt19937 rng(43);
  const TreeTopology topo = TreeTopology::balanced(4);
  const LayeredCircuit circuit = random_circuit(topo, 1, rng);
  const StateVector target = oracles::random_state(4, rng);

  SweepConfig bad_sweeps;
  bad_sweeps.sweeps = 0;
  CHECK_THROWS_AS(ttncirc::sweep_optimize(circuit, target, bad_sweeps),
                  PreconditionError);
  SweepConfig bad_rate;
  bad_rate.learning_rate = 1.5;
  CHECK_THROWS_AS(ttncirc::sweep_optimize(circuit, target, bad_rate),
                  PreconditionError);
}

TEST_CASE("embed: every method nails a bond-2 target at one layer", "[optimize]") {
  std::mt19937 rng(47);
  const TreeTopology topo = TreeTopology::caterpillar(6);
  const TreeTensorNetwork psi0 =
      ttncirc::from_statevector(oracles::random_state(6, rng), topo, 2);

  SweepConfig cfg;
  cfg.sweeps = 200;
  cfg.learning_rate = 1.0;
  for (const EmbedMethod method :
       {EmbedMethod::DAll, EmbedMethod::OAll, EmbedMethod::IterI,
        EmbedMethod::IterD}) {
    const EmbedReport report = ttncirc::embed(psi0, method, 1, cfg);
    INFO(ttncirc::embed_method_name(method));
    CHECK(report.final_infidelity < 1e-8);
    REQUIRE(!report.rows.empty());
    for (const auto& row : report.rows) {
      CHECK(row.infidelity >= 0.0);
      CHECK(row.infidelity <= 1.0);
    }
  }
}

TEST_CASE("embed: Iter_D does not trail D_all", "[optimize]") {
  std::mt19937 rng(53);
  const TreeTopology topo = TreeTopology::balanced(8);
  const TreeTensorNetwork psi0 =
      ttncirc::from_statevector(oracles::random_state(8, rng), topo, 4);

  SweepConfig cfg;
  cfg.sweeps = 30;
  cfg.learning_rate = 1.0;
  const EmbedReport dall = ttncirc::embed(psi0, EmbedMethod::DAll, 2, cfg);
  const EmbedReport iterd = ttncirc::embed(psi0, EmbedMethod::IterD, 2, cfg);
  CHECK(iterd.final_infidelity <= dall.final_infidelity + 1e-9);

  // The report's final infidelity must match a dense evaluation of the
  // returned circuit.
  const double check = ttncirc::infidelity(
      ttncirc::to_statevector(psi0),
      oracles::apply_circuit_dense(iterd.circuit, ttncirc::zero_state(8)));
  CHECK(iterd.final_infidelity == Catch::Approx(check).margin(1e-10));
}

TEST_CASE("embed: Iter_D stage finals never worsen with depth", "[optimize]") {
  std::mt19937 rng(59);
  const TreeTopology topo = TreeTopology::balanced(8);
  const TreeTensorNetwork psi0 =
      ttncirc::from_statevector(oracles::random_state(8, rng), topo, 4);

  SweepConfig cfg;
  cfg.sweeps = 20;
  cfg.learning_rate = 1.0;
  const EmbedReport report = ttncirc::embed(psi0, EmbedMethod::IterD, 3, cfg);

  double prev_final = 1.0;
  for (std::size_t k = 1; k <= 3; ++k) {
    double stage_final = -1.0;
    for (const auto& row : report.rows)
      if (row.layer_count == k) stage_final = row.infidelity;
    REQUIRE(stage_final >= 0.0);
    CHECK(stage_final <= prev_final + 1e-9);
    prev_final = stage_final;
  }
}

TEST_CASE("embed: report structure and method tags", "[optimize]") {
  std::mt19937 rng(61);
  const TreeTopology topo = TreeTopology::balanced(4);
  const TreeTensorNetwork psi0 =
      ttncirc::from_statevector(oracles::random_state(4, rng), topo, 4);

  SweepConfig cfg;
  cfg.sweeps = 5;
  const EmbedReport dall = ttncirc::embed(psi0, EmbedMethod::DAll, 3, cfg);
  REQUIRE(dall.rows.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(dall.rows[k].layer_count == k + 1);
    CHECK(dall.rows[k].sweep == 0);
  }
  CHECK(dall.circuit.layers.size() == 3);

  CHECK(ttncirc::embed_method_name(EmbedMethod::IterD) == "Iter_D");
  CHECK(ttncirc::parse_embed_method("O_all") == EmbedMethod::OAll);
  CHECK_THROWS_AS(ttncirc::parse_embed_method("Q_all"), ConfigError);
  CHECK_THROWS_AS(ttncirc::embed(psi0, EmbedMethod::DAll, 0, cfg),
                  PreconditionError);
}
