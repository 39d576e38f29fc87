#pragma once

#include <string>

#include <Eigen/Dense>

#include "rydpar/plaquette.hpp"
#include "rydpar/pulse.hpp"

namespace rydpar {

struct DecayModel {
  double rate = 1.0 / 150.0;  // 1/us
  double to_down = 0.2;
  double to_up = 0.2;
  double to_dark = 0.6;

  void validate() const;
  static DecayModel none() { return {0.0, 0.2, 0.2, 0.6}; }
};

// Which qubit level the laser couples to the Rydberg state.
enum class CoupledLevel { down, up };

// Per-atom levels in the full space: down = 0, up = 1, r = 2, d = 3;
// basis index sum_k level_k 4^k.
enum AtomLevel : int { kDown = 0, kUp = 1, kRydberg = 2, kDark = 3 };

struct LindbladOptions {
  double step_bound = 0.05;  // RK4 step times generator spread
  double max_step = 0.0;
};

// Master-equation evolution of a 4^N density matrix, N = 1..4 atoms.
Eigen::MatrixXcd lindblad_evolve(const PiecewisePulse& pulse, CoupledLevel coupled,
                                 PlaquetteConfig config, const DecayModel& decay,
                                 const Eigen::MatrixXcd& rho0,
                                 const LindbladOptions& options = {});

// Superoperator on the 16-dim qubit subspace, column-stacked:
// vec(rho)[i + 16 j] = rho(i, j), basis z with bit k set <=> atom k down.
struct QuantumChannel {
  Eigen::MatrixXcd superop = Eigen::MatrixXcd::Identity(256, 256);
  bool trace_preserving = true;
  std::string provenance;

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
};

QuantumChannel identity_channel();
QuantumChannel depolarizing_channel();
QuantumChannel zero_channel();
QuantumChannel unitary_channel(const GateAmplitudes& amplitudes);
QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first);

Eigen::MatrixXcd choi_matrix(const QuantumChannel& channel);
double min_choi_eigenvalue(const QuantumChannel& channel);
// Largest output trace over normalized inputs.
double max_output_trace(const QuantumChannel& channel);

enum class ChannelMethod { symmetric, full };

struct ChannelOptions {
  ChannelMethod method = ChannelMethod::symmetric;
  LindbladOptions integrator;
};

// Pulse 1 couples down atoms, pulse 2 couples up atoms; the state is
// projected onto the qubit subspace after each pulse.
QuantumChannel gate_channel(const PiecewisePulse& pulse_down, const PiecewisePulse& pulse_up,
                            PlaquetteConfig config, const DecayModel& decay,
                            const ChannelOptions& options = {});

// Column of the full-space reference channel for input |x><y|.
Eigen::VectorXcd full_channel_column(const PiecewisePulse& pulse_down,
                                     const PiecewisePulse& pulse_up, PlaquetteConfig config,
                                     const DecayModel& decay, int x, int y,
                                     const LindbladOptions& options = {});

double average_gate_fidelity(const QuantumChannel& channel, const GateTarget& target);
double average_gate_fidelity(const QuantumChannel& channel, double gamma);

}  // namespace rydpar
