#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rydpar/laser.hpp"
#include "rydpar/pulse.hpp"

namespace rydpar {

using cplx = std::complex<double>;

// Fixed-step RK4 with step h chosen so that h * max||H|| <= step_bound on
// every segment, checked against a run at h/2.
struct IntegratorOptions {
  double tolerance = 1e-6;  // Richardson difference and unitarity defect
  double step_bound = 0.05;
  double max_step = 0.0;  // optional cap on h (us); 0 disables
  bool richardson = true;
  int max_refinements = 8;
  // Subtract a time-dependent multiple of the identity; changes only the
  // global phase, so use it when fidelities alone are needed.
  bool center_spectrum = false;
};

struct IntegrationReport {
  std::int64_t steps = 0;  // steps of the returned (finest) run
  double step_bound = 0.0;
  double richardson_error = 0.0;
  double unitarity_error = 0.0;
  int refinements = 0;
};

// Dicke-sector Hamiltonian in the Rydberg-count basis k = 0..n.
Eigen::MatrixXd sector_hamiltonian(int n, LaserPoint point, PlaquetteConfig config);
// dH/dOmega and dH/dDelta for sector n.
Eigen::MatrixXd sector_drive_generator(int n);
Eigen::MatrixXd sector_detuning_generator(int n);

struct SectorSpectrum {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // columns matched to energies
};

SectorSpectrum sector_spectrum(int n, LaserPoint point, PlaquetteConfig config);
double spectral_norm(const Eigen::MatrixXd& symmetric);

// Eigen-index with maximal weight on the all-ground state; throws on a
// degenerate k = 0 level.
int ground_connected_index(int n, LaserPoint point, PlaquetteConfig config);

struct TrackPoint {
  double time = 0.0;
  int index = 0;
  double energy = 0.0;
  double overlap_k0 = 0.0;  // |<k=0|v>|^2
};

struct EigenTrack {
  std::vector<TrackPoint> points;
  int initial_index = 0;
  double min_overlap = 1.0;  // smallest consecutive overlap^2 encountered
};

EigenTrack track_eigenstate(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                            int samples = 400);

// -integral of the tracked eigenenergy per segment, with the signed k = 0
// components of the continuously followed eigenvector at both ends.
struct SectorPhases {
  std::vector<double> phase;
  std::vector<int> index;  // tracked index at each segment end
  int initial_index = 0;
  double start_k0 = 1.0;
  double end_k0 = 1.0;
  double total() const;
};

// Gauss-Legendre quadrature per schedule interval; `refinement` subdivides.
SectorPhases tracked_phases(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                            int refinement = 1);

struct SectorPropagator {
  Eigen::MatrixXcd matrix;
  IntegrationReport report;
};

SectorPropagator evolve_sector(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                               const IntegratorOptions& options = {});

Eigen::VectorXcd evolve_sector_state(const PiecewisePulse& pulse, int n,
                                     PlaquetteConfig config, const Eigen::VectorXcd& psi0,
                                     const IntegratorOptions& options = {},
                                     IntegrationReport* report = nullptr);

// Largest spectral norm of the sector Hamiltonian along one segment.
double segment_norm_bound(const PulseSegment& seg, int n, PlaquetteConfig config,
                          bool centered = false);

// Basis state z: bit i set <=> atom i in the down state.
using GateAmplitudes = std::array<cplx, 16>;

GateAmplitudes coherent_gate_channel(const PiecewisePulse& pulse_down,
                                     const PiecewisePulse& pulse_up, PlaquetteConfig config,
                                     const IntegratorOptions& options = {});

// Diagonal target phases by class: n(z) in {0,4}, {2}, {1,3}.
struct GateTarget {
  double class_a = 0.0;
  double class_b = 0.0;
  double odd = 0.0;

  static GateTarget from_gamma(double gamma);
  static GateTarget from_phase_differences(double dphi_a, double dphi_b);
  cplx amplitude(int z) const;
};

double coherent_average_fidelity(const GateAmplitudes& amplitudes, const GateTarget& target);
double coherent_average_fidelity(const GateAmplitudes& amplitudes, double gamma);

}  // namespace rydpar
