#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rydpar/laser.hpp"
#include "rydpar/path.hpp"
#include "rydpar/plaquette.hpp"

namespace rydpar {

AdiabaticPath spline_path(LaserPoint start, LaserPoint end,
                          const std::vector<LaserPoint>& interior = {});

// Tracked index per sector for a ramp leaving a dark (Omega = 0) point.
std::array<int, 5> dark_tracked_indices(LaserPoint start, PlaquetteConfig config);

struct GapAndNorms {
  double gap = 0.0;
  double d1_norm = 0.0;  // ||dH/du||, max over sectors
  double d2_norm = 0.0;  // ||d2H/du2||, max over sectors
  int gap_sector = -1;
  bool crossing = false;  // gap below 1e-9
};

// Evaluated on the unscheduled shape at parameter u.
GapAndNorms gap_and_norms(const AdiabaticPath& path, double u, PlaquetteConfig config,
                          const std::vector<int>& sectors);

struct ScheduleOptions {
  int nodes = 512;
  bool literal = false;  // rates at s instead of theta(s)
};

// Writes the schedule for exponent q into a copy of the path.
AdiabaticPath reparametrize(const AdiabaticPath& path, double q, PlaquetteConfig config,
                            const ScheduleOptions& options = {});

struct FidelityOptions {
  double step_bound = 0.05;
  bool richardson = false;
};

// Per-sector fidelity against the tracked eigenstate at s = 1, ordered as
// path.sectors.
std::vector<double> ramp_fidelity(const AdiabaticPath& path, double duration,
                                  PlaquetteConfig config,
                                  const FidelityOptions& options = {});

struct ScanOptions {
  double initial = 1e-3;  // us
  double growth = 1.5;
  int persistence = 3;
  double relative_width = 1e-2;
  double cap = 1e3;
  FidelityOptions fidelity;
};

struct TimeFunctional {
  double duration = 0.0;
  bool degenerate = false;  // passed from the first scan point
  double worst_fidelity = 0.0;  // at the returned duration
  int evaluations = 0;
};

TimeFunctional time_functional(const AdiabaticPath& path, double epsilon,
                               PlaquetteConfig config, const ScanOptions& options = {});

// Four-term adiabatic-theorem bound divided by epsilon, composite Simpson.
double adiabatic_upper_bound(const AdiabaticPath& path, double epsilon, PlaquetteConfig config,
                             int nodes = 1024);

struct RampReport {
  std::vector<int> sectors;
  std::vector<double> fidelity;
  std::vector<double> min_gap;
  double duration = 0.0;  // T_eps
  double epsilon = 0.0;
  double bound = 0.0;
  bool degenerate = false;
};

RampReport ramp_report(const AdiabaticPath& path, double epsilon, PlaquetteConfig config,
                       const ScanOptions& scan = {});

struct RampBounds {
  double rabi_max = 0.0;
  double detuning_min = 0.0;
  double detuning_max = 0.0;
  double q_min = 0.0;
  double q_max = 1.0;
};

struct RampProblem {
  LaserPoint start;
  LaserPoint end;
  int interior = 0;
  double epsilon = 1e-3;
  std::vector<int> sectors{1, 2, 3, 4};
  std::optional<std::array<int, 5>> tracked;  // defaults from a dark start
  RampBounds bounds;
};

struct RampOptions {
  int budget = 100;  // annealing outer steps
  std::uint64_t seed = 0;
  int local_evaluations = 40;
  double initial_q = 0.75;
  std::vector<LaserPoint> initial_interior;  // default: on the straight line
  ScanOptions scan;
  ScheduleOptions schedule;
};

struct OptimizedRamp {
  AdiabaticPath path;
  RampReport report;
  int evaluations = 0;
  std::uint64_t seed = 0;
};

OptimizedRamp optimize_ramp(const RampProblem& problem, PlaquetteConfig config,
                            const RampOptions& options = {});

// Straight ramp with the sector bookkeeping of `problem`, T_eps evaluated.
OptimizedRamp linear_reference(const RampProblem& problem, PlaquetteConfig config,
                               const ScanOptions& scan = {});

}  // namespace rydpar
