// SPDX-License-Identifier: Apache-2.0
//
// ttncirc command line: build target states, convert them to tree tensor
// networks, run single embeddings, and drive batch experiment reports.
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ttncirc/errors.hpp"
#include "ttncirc/experiment.hpp"
#include "ttncirc/optimize.hpp"
#include "ttncirc/serialize.hpp"
#include "ttncirc/states.hpp"

namespace {

using ttncirc::ExperimentConfig;

struct StateArgs {
  ExperimentConfig cfg;
  std::string boundary = "open";
  std::string out;
};

void run_build_state(StateArgs& args) {
  args.cfg.boundary = ttncirc::parse_boundary(args.boundary);
  const ttncirc::TargetInfo target = ttncirc::build_target(args.cfg);
  ttncirc::save_state(args.out, target.psi);
  std::cout << "wrote " << args.out << " (" << target.psi.size() << " amplitudes)";
  if (target.details.contains("energy"))
    std::cout << ", ground-state energy " << target.details["energy"].get<double>();
  std::cout << "\n";
}

struct NetworkArgs {
  ExperimentConfig cfg;
  std::string state;
  std::string out;
};

void run_build_network(NetworkArgs& args) {
  const ttncirc::StateVector psi = ttncirc::load_state(args.state);
  std::size_t n = 0;
  while ((std::size_t{1} << n) < psi.size()) ++n;
  const ttncirc::TreeTopology topo = ttncirc::build_topology(args.cfg, n);
  double truncation = 0.0;
  const ttncirc::TreeTensorNetwork net =
      ttncirc::from_statevector(psi, topo, args.cfg.chi, &truncation);
  ttncirc::write_json_file(args.out, ttn_to_json(net));
  std::cout << "wrote " << args.out << " (chi " << net.max_virtual_bond()
            << ", truncation infidelity " << ttncirc::detail::format_real("%.6e", truncation)
            << ")\n";
}

struct EmbedArgs {
  std::string network;
  std::string method = "Iter_D";
  std::size_t layers = 1;
  ttncirc::SweepConfig sweep;
  std::size_t chi_cap = 0;
  double rel_tol = 1e-12;
  std::string report;
  std::string trace;
  std::string circuit;
};

void run_embed(EmbedArgs& args) {
  const ttncirc::TreeTensorNetwork net =
      ttncirc::ttn_from_json(ttncirc::read_json_file(args.network));
  if (args.layers < 1) throw ttncirc::ConfigError("--layers must be >= 1");
  if (args.sweep.sweeps < 1) throw ttncirc::ConfigError("--sweeps must be >= 1");
  if (!(args.sweep.learning_rate >= 0.0 && args.sweep.learning_rate <= 1.0))
    throw ttncirc::ConfigError("--learning-rate must lie in [0, 1]");
  if (!(args.sweep.convergence_tol >= 0.0))
    throw ttncirc::ConfigError("--convergence-tol must be >= 0");
  const ttncirc::EmbedReport result = ttncirc::embed(
      net, ttncirc::parse_embed_method(args.method), args.layers, args.sweep, args.chi_cap,
      args.rel_tol);
  ttncirc::write_json_file(args.report, report_to_json(result));
  if (!args.trace.empty()) ttncirc::write_text_file(args.trace, report_to_csv(result));
  if (!args.circuit.empty())
    ttncirc::write_json_file(args.circuit, circuit_to_json(result.circuit));
  std::cout << args.method << ": final infidelity "
            << ttncirc::detail::format_real("%.6e", result.final_infidelity) << " after "
            << args.layers << " layer(s), " << result.rows.size() << " trace rows\n";
}

struct ReportArgs {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;
  std::string output;
};

void run_report(ReportArgs& args) {
  ExperimentConfig cfg;
  if (!args.preset.empty()) cfg = ttncirc::preset_config(args.preset);
  if (!args.config.empty()) {
    if (!args.preset.empty())
      throw ttncirc::ConfigError("--config and --preset are mutually exclusive");
    cfg = ttncirc::load_experiment_config(args.config);
  }
  for (const std::string& item : args.overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ttncirc::ConfigError("--set expects key=value, got '" + item + "'");
    ttncirc::detail::apply_config_entry(cfg, ttncirc::detail::trim(item.substr(0, eq)),
                                        ttncirc::detail::trim(item.substr(eq + 1)));
  }
  if (!args.output.empty()) cfg.output = args.output;
  ttncirc::validate_experiment_config(cfg);
  const ttncirc::ExperimentResult result = ttncirc::run_experiment(cfg);
  std::size_t ok = 0, failed = 0;
  for (const ttncirc::CellOutcome& cell : result.cells) (cell.ok ? ok : failed) += 1;
  std::cout << "ran " << result.cells.size() << " cells (" << ok << " ok, " << failed
            << " failed) on " << result.qubit_count << " qubits; network infidelity "
            << ttncirc::detail::format_real("%.6e", result.ttn_infidelity) << "\n";
  for (const ttncirc::CellOutcome& cell : result.cells)
    if (cell.selected)
      std::cout << "  " << embed_method_name(cell.method) << " K=" << cell.layer_count << " r="
                << ttncirc::detail::format_real("%g", cell.learning_rate) << " -> "
                << ttncirc::detail::format_real("%.6e", cell.infidelity) << "\n";
  std::cout << "results in " << result.output_dir << "\n";
  if (failed > 0) throw ttncirc::NumericalError(std::to_string(failed) + " cell(s) failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree tensor networks embedded into shallow two-qubit circuits"};
  app.set_version_flag("--version", std::string("ttncirc ") + ttncirc::kToolVersion);
  app.require_subcommand(1);

  StateArgs state_args;
  CLI::App* build_state = app.add_subcommand("build-state", "construct a target state vector");
  build_state->add_option("--target", state_args.cfg.target, "bas | heisenberg | fixture")
      ->check(CLI::IsMember({"bas", "heisenberg", "fixture"}));
  build_state->add_option("--rows", state_args.cfg.rows, "lattice rows");
  build_state->add_option("--cols", state_args.cfg.cols, "lattice cols");
  build_state->add_option("--boundary", state_args.boundary, "open | periodic")
      ->check(CLI::IsMember({"open", "periodic"}));
  build_state->add_option("--j1", state_args.cfg.j1, "nearest-neighbor coupling");
  build_state->add_option("--j2", state_args.cfg.j2, "next-nearest-neighbor coupling");
  build_state->add_option("--fixture", state_args.cfg.fixture, "input state file to re-emit");
  build_state->add_option("--seed", state_args.cfg.seed, "eigensolver seed");
  build_state->add_option("--out", state_args.out, "output path (.json or binary)")->required();
  build_state->callback([&] { run_build_state(state_args); });

  NetworkArgs network_args;
  CLI::App* build_network =
      app.add_subcommand("build-network", "convert a state into a tree tensor network");
  build_network->add_option("--state", network_args.state, "input state file")->required();
  build_network
      ->add_option("--topology", network_args.cfg.topology,
                   "balanced-tree | mps-caterpillar | lattice | custom")
      ->check(CLI::IsMember({"balanced-tree", "mps-caterpillar", "lattice", "custom"}));
  build_network->add_option("--topology-file", network_args.cfg.topology_file,
                            "topology JSON for --topology custom");
  build_network->add_option("--rows", network_args.cfg.rows, "lattice rows (topology lattice)");
  build_network->add_option("--cols", network_args.cfg.cols, "lattice cols (topology lattice)");
  build_network->add_option("--chi", network_args.cfg.chi, "bond dimension cap")
      ->check(CLI::PositiveNumber);
  build_network->add_option("--out", network_args.out, "output TTN JSON path")->required();
  build_network->callback([&] { run_build_network(network_args); });

  EmbedArgs embed_args;
  CLI::App* embed = app.add_subcommand("embed", "embed a network into a layered circuit");
  embed->add_option("--network", embed_args.network, "input TTN JSON")->required();
  embed->add_option("--method", embed_args.method, "D_all | O_all | Iter_I | Iter_D")
      ->check(CLI::IsMember({"D_all", "O_all", "Iter_I", "Iter_D"}));
  embed->add_option("--layers", embed_args.layers, "number of circuit layers K");
  embed->add_option("--sweeps", embed_args.sweep.sweeps, "optimization sweeps T");
  embed->add_option("--learning-rate", embed_args.sweep.learning_rate, "update rate r in [0, 1]");
  embed->add_option("--convergence-tol", embed_args.sweep.convergence_tol,
                    "early-stop threshold (0 disables)");
  embed->add_option("--chi-cap", embed_args.chi_cap,
                    "absorption bond cap (0: network's bond)");
  embed->add_option("--rel-tol", embed_args.rel_tol, "relative SVD truncation tolerance");
  embed->add_option("--report", embed_args.report, "output report JSON")->required();
  embed->add_option("--trace", embed_args.trace, "optional trace CSV");
  embed->add_option("--circuit", embed_args.circuit, "optional circuit JSON");
  embed->callback([&] { run_embed(embed_args); });

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "run a batch experiment grid");
  report->add_option("--config", report_args.config, "key=value config file");
  report->add_option("--preset", report_args.preset,
                     "desk-bas | desk-heisenberg | desk-bas-chi16 | full-bas | full-heisenberg");
  report->add_option("--set", report_args.overrides, "override, e.g. --set sweeps=50")
      ->take_all();
  report->add_option("--output", report_args.output, "output directory override");
  report->callback([&] { run_report(report_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const ttncirc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
