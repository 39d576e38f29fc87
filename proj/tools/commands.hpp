#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace rydpar::cli {

// Flags shared by every subcommand.
struct Common {
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> budget;
  int threads = 1;
  std::string format = "csv";
};

struct EncodeArgs {
  std::string input;
  bool validate_only = false;
};

struct SpectrumArgs {
  double interaction = 251.327;
  std::optional<double> rabi;  // default V/2
  std::optional<double> detuning_min, detuning_max;  // default [-V, 3V]
  int points = 201;
  std::string sectors = "0,1,2,3,4";
};

struct GateArgs {
  std::string calibration;
  std::optional<double> gamma;
  std::optional<double> dphi_a, dphi_b;
  double decay_rate = 1.0 / 150.0;
};

// Each returns the process exit code; library errors propagate as exceptions.
int run_encode(const EncodeArgs& args, const Common& common);
int run_spectrum(const SpectrumArgs& args, const Common& common);
int run_ramp_optimize(const std::string& config, const Common& common);
int run_calibrate(const std::string& config, const Common& common);
int run_gate(const GateArgs& args, const Common& common);
int run_error_curve(const std::string& config, const Common& common);
int run_qaoa(const std::string& config, const Common& common);
int run_ensemble(const std::string& config, const Common& common);

}  // namespace rydpar::cli
