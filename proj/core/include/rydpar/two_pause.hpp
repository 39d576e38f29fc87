#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rydpar/open_system.hpp"
#include "rydpar/optimize.hpp"
#include "rydpar/path.hpp"
#include "rydpar/plaquette.hpp"
#include "rydpar/pulse.hpp"
#include "rydpar/ramps.hpp"

namespace rydpar {

struct Waypoints {
  double detuning_start = 0.0;
  double rabi_a = 0.0;
  double detuning_a = 0.0;
  double rabi_b = 0.0;
  double detuning_b = 0.0;
  double detuning_end = 0.0;

  LaserPoint start() const { return {0.0, detuning_start}; }
  LaserPoint point_a() const { return {rabi_a, detuning_a}; }
  LaserPoint point_b() const { return {rabi_b, detuning_b}; }
  LaserPoint end() const { return {0.0, detuning_end}; }

  std::array<double, 6> values() const;
  static Waypoints from_values(const std::array<double, 6>& v);
  bool operator==(const Waypoints&) const = default;
};

// Experiment box. Edges of the dark detunings and the lower Rabi edge are
// open; `margin` (relative) keeps the optimizer strictly inside.
struct GateBox {
  double rabi_max = 0.0;
  double edge_detuning_min = 0.0;  // start and end
  double edge_detuning_max = 0.0;
  double hold_detuning_min = 0.0;  // points A and B
  double hold_detuning_max = 0.0;
  double margin = 1e-3;

  // Delta_start,end in [-3V, 0), Delta_A,B in [-3V, V), Omega in (0, rabi_max].
  static GateBox defaults(double interaction, double rabi_max);
  bool contains(const Waypoints& w) const;
  Box search_box() const;
};

struct PhaseTables {
  // -integral of the tracked eigenenergy per sector and ramp.
  std::array<std::array<double, 3>, 5> ramp_phase{};
  // pi where the followed eigenvector returns with flipped sign.
  std::array<double, 5> sign_phase{};
  double ramp_a = 0.0;  // (Phi_0 + Phi_4) - (Phi_1 + Phi_3) over the ramps
  double ramp_b = 0.0;  // 2 Phi_2 - (Phi_1 + Phi_3)
  std::array<double, 5> energy_a{}, energy_b{};  // tracked energies at the pauses
  // Pause energy differences E_1 + E_3 - E_even per class and pause.
  double de_a_at_a = 0.0, de_b_at_a = 0.0, de_a_at_b = 0.0, de_b_at_b = 0.0;
  std::array<double, 3> durations{};
  std::array<int, 5> index_a{}, index_b{};
};

PhaseTables compute_phase_tables(const std::array<RampSegment, 3>& ramps,
                                 PlaquetteConfig config, int refinement = 1);

struct HoldSolution {
  double t_a = 0.0;
  double t_b = 0.0;
  int m_a = 0;
  int m_b = 0;
  double total() const { return t_a + t_b; }
};

HoldSolution solve_hold_times(double dphi_a, double dphi_b, const PhaseTables& tables,
                              int m_max = 8);

struct WorstCaseHold {
  double hold = 0.0;
  double dphi_a = 0.0;
  double dphi_b = 0.0;
};

WorstCaseHold worst_case_hold(const PhaseTables& tables, int grid = 64, int m_max = 8);

struct GateCalibration {
  Waypoints waypoints;
  std::array<AdiabaticPath, 3> ramps;
  PhaseTables tables;
  PlaquetteConfig config;
  GateBox box;
  double epsilon = 0.0;
  int interior = 0;
  int m_max = 8;
  int grid = 64;
  double worst_hold = 0.0;
  double worst_gate = 0.0;  // 2 (T_ramps + worst_hold)
  std::array<int, 5> tracked{};
  std::uint64_t seed = 0;
  int budget = 0;
  int evaluations = 0;

  double ramp_time() const;
  std::array<RampSegment, 3> ramp_segments() const;
};

struct CalibrationOptions {
  int budget = 100;  // basin-hopping hops
  std::uint64_t seed = 0;
  int interior = 1;
  int grid = 64;
  int m_max = 8;
  int local_evaluations = 20;
  // Re-optimize every ramp per candidate; otherwise straight spline paths
  // with the fixed exponent ramp.initial_q.
  bool optimize_ramps = true;
  RampOptions ramp;
  std::optional<Waypoints> initial;
  // Called after every candidate with its worst-case gate time (infinite
  // when infeasible) and the best so far.
  std::function<void(int candidate, double gate, double best)> on_candidate;
};

Waypoints default_waypoints(const GateBox& box, double interaction);

// Builds ramps, tables and worst-case times for fixed waypoints.
GateCalibration calibrate_waypoints(const Waypoints& waypoints, const GateBox& box,
                                    PlaquetteConfig config, double epsilon,
                                    const CalibrationOptions& options = {});

GateCalibration optimize_waypoints(const GateBox& box, PlaquetteConfig config, double epsilon,
                                   const CalibrationOptions& options = {});

struct GatePulse {
  PiecewisePulse pulse;  // one of the two identical pulses
  HoldSolution hold;
  double dphi_a = 0.0;
  double dphi_b = 0.0;
  double gate_time() const { return 2.0 * pulse.duration(); }
};

GatePulse gate_for_targets(const GateCalibration& cal, double dphi_a, double dphi_b);
GatePulse gate_for_gamma(const GateCalibration& cal, double gamma);

// Phase differences obtained by integrating tracked eigenenergies over a pulse.
std::array<double, 2> tracked_phase_differences(const PiecewisePulse& pulse,
                                                PlaquetteConfig config, int refinement = 1);

double wrap_phase(double phi);  // into [0, 2 pi)

struct ErrorCurveOptions {
  int samples = 100;
  bool gamma_only = false;
  std::optional<DecayModel> decay;
  std::uint64_t seed = 0;
  IntegratorOptions coherent;
  ChannelOptions channel;
};

struct ErrorCurveRow {
  double epsilon = 0.0;
  double gate_time = 0.0;  // worst-case gate time of the level
  double mean_error = 0.0;
  int samples = 0;
  double decay_rate = 0.0;
  double standard_error = 0.0;
  double mean_duration = 0.0;  // mean of the sampled pulses
};

ErrorCurveRow error_level(const GateCalibration& cal, const ErrorCurveOptions& options);
std::vector<ErrorCurveRow> error_curve(const std::vector<GateCalibration>& levels,
                                       const ErrorCurveOptions& options);

}  // namespace rydpar
