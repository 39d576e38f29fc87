#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "rydpar/errors.hpp"
#include "rydpar/io.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitUsage = 64;

int exit_code(rydpar::ErrorKind k) {
  switch (k) {
    case rydpar::ErrorKind::input: return kExitInput;
    case rydpar::ErrorKind::infeasible: return kExitInfeasible;
    case rydpar::ErrorKind::numerical: return kExitNumerical;
  }
  return 1;
}

void add_common(CLI::App* sub, rydpar::cli::Common& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Master seed (overrides the config)");
  sub->add_option("--budget", c.budget, "Iteration budget (overrides the config)");
  sub->add_option("--threads", c.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--format", c.format, "Tabular output format")
      ->check(CLI::IsMember({"csv"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rydpar::cli;
  CLI::App app{"Parity-encoded Rydberg gates and QAOA"};
  app.set_version_flag("--version", std::string(rydpar::kVersion));
  app.require_subcommand(1);

  Common common;
  EncodeArgs enc;
  SpectrumArgs sweep;
  GateArgs gate;
  std::string config;

  auto* encode = app.add_subcommand("encode", "Build and validate a parity layout");
  encode->add_option("input", enc.input, "Problem, bipartite or layout file")->required();
  encode->add_flag("--validate-only", enc.validate_only, "Validate a layout and report only");

  auto* spectrum = app.add_subcommand("spectrum", "Sector eigenvalues along a detuning sweep");
  spectrum->add_option("--interaction", sweep.interaction, "V in rad/us")->capture_default_str();
  spectrum->add_option("--rabi", sweep.rabi, "Omega in rad/us (default V/2)");
  spectrum->add_option("--detuning-min", sweep.detuning_min, "rad/us (default -V)");
  spectrum->add_option("--detuning-max", sweep.detuning_max, "rad/us (default 3V)");
  spectrum->add_option("--points", sweep.points)->capture_default_str();
  spectrum->add_option("--sectors", sweep.sectors, "Comma-separated excitation sectors")
      ->capture_default_str();

  auto* ramp = app.add_subcommand("ramp-optimize", "Optimize one adiabatic ramp");
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the two-pause gate");
  auto* error_curve = app.add_subcommand("error-curve", "Mean gate error per calibration");
  auto* qaoa = app.add_subcommand("qaoa", "One stochastic QAOA optimization run");
  auto* ensemble = app.add_subcommand("ensemble", "QAOA runs over plaquette error rates");
  for (auto* sub : {ramp, calibrate, error_curve, qaoa, ensemble})
    sub->add_option("config", config, "JSON configuration")->required();

  auto* gate_cmd = app.add_subcommand("gate", "Pulse and fidelity for one gate");
  gate_cmd->add_option("calibration", gate.calibration, "Calibration file")
      ->required();
  gate_cmd->add_option("--gamma", gate.gamma, "Gate angle (default pi)");
  gate_cmd->add_option("--dphi-a", gate.dphi_a, "Target phase difference A");
  gate_cmd->add_option("--dphi-b", gate.dphi_b, "Target phase difference B");
  gate_cmd->add_option("--decay-rate", gate.decay_rate, "Rydberg decay in 1/us; 0 disables")
      ->capture_default_str();

  for (auto* sub : {encode, spectrum, ramp, calibrate, gate_cmd, error_curve, qaoa, ensemble})
    add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*encode) return run_encode(enc, common);
    if (*spectrum) return run_spectrum(sweep, common);
    if (*ramp) return run_ramp_optimize(config, common);
    if (*calibrate) return run_calibrate(config, common);
    if (*gate_cmd) return run_gate(gate, common);
    if (*error_curve) return run_error_curve(config, common);
    if (*qaoa) return run_qaoa(config, common);
    if (*ensemble) return run_ensemble(config, common);
  } catch (const rydpar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed configuration: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
