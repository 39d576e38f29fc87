#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "rydpar/encoding.hpp"

namespace rydpar {

using amp = std::complex<double>;
using Statevector = std::vector<amp>;

// Flat index: [0, p) alpha, [p, 2p) beta, [2p, 3p) gamma.
struct QaoaParams {
  std::vector<double> alpha, beta, gamma;

  static QaoaParams zeros(int depth);
  int depth() const { return static_cast<int>(alpha.size()); }
  void validate() const;
  double& flat(int index);
  double flat(int index) const;
  bool operator==(const QaoaParams&) const = default;
};

struct NoiseModel {
  double p1 = 0.0;  // per single-qubit gate
  double p4 = 0.0;  // per plaquette gate
  void validate() const;
  bool noiseless() const { return p1 == 0.0 && p4 == 0.0; }
};

// One inserted Pauli; masks over qubit bits.
struct PauliEvent {
  enum class Stage { constraint, field, driver };
  int layer = 0;
  Stage stage = Stage::constraint;
  int slot = 0;  // plaquette or qubit index within the stage
  std::uint64_t x = 0;
  std::uint64_t z = 0;
};

struct Trajectory {
  std::vector<PauliEvent> events;
  double measurement = 0.0;  // uniform in [0, 1)
  int single_qubit_slots = 0;
  int plaquette_slots = 0;
};

struct EnergyEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int shots = 0;
};

// Statevector simulator for parity QAOA: e^{-i alpha H_X} e^{-i beta H_Z}
// e^{-i gamma H_C} per layer, H_C = -sum over plaquettes of the member Z
// product, H_Z = sum J Z, from |+>^K. Qubit k is bit k; bit set <=> z = -1.
// Noise is tracked as a Pauli frame, so a trajectory only re-simulates from
// the first layer it modifies.
class QaoaSimulator {
 public:
  explicit QaoaSimulator(const ParityLayout& layout);

  int num_qubits() const { return k_; }
  std::size_t dimension() const { return dim_; }
  const ParityLayout& layout() const { return layout_; }
  // parity_energy of every basis state at the layout's penalty.
  const std::vector<double>& energies() const { return energy_; }

  Statevector plus_state() const;
  void apply_layer(Statevector& psi, double alpha, double beta, double gamma) const;
  Statevector ideal_state(const QaoaParams& params) const;

  Trajectory draw_trajectory(const QaoaParams& params, const NoiseModel& noise,
                             std::mt19937_64& rng) const;
  // Final state of a trajectory before the frame's bit flips, plus the
  // frame's X mask that maps outcomes y to y ^ mask.
  Statevector trajectory_state(const QaoaParams& params, const Trajectory& t,
                               std::uint64_t* outcome_flip) const;
  std::uint64_t noisy_shot(const QaoaParams& params, const NoiseModel& noise,
                           std::mt19937_64& rng) const;

  // Worker threads for noisy estimates; results are identical for any count.
  void set_threads(int threads) { threads_ = threads < 1 ? 1 : threads; }
  int threads() const { return threads_; }

  // Shot s of update u draws from its own stream derived from (seed, u, s).
  EnergyEstimate estimate_energy(const QaoaParams& params, const NoiseModel& noise, int shots,
                                 std::uint64_t seed, std::uint64_t update) const;

 private:
  struct Frame {
    std::uint64_t plaquette_flips = 0;
    std::uint64_t field_flip = 0;
    std::uint64_t driver_sign = 0;
    bool trivial() const { return !plaquette_flips && !field_flip && !driver_sign; }
  };
  std::vector<Frame> frames(const QaoaParams& params, const Trajectory& t,
                            std::uint64_t* final_x) const;
  void apply_layer_frame(Statevector& psi, double alpha, double beta, double gamma,
                         const Frame& f) const;
  std::uint64_t sample(const Statevector& psi, double u) const;

  ParityLayout layout_;
  int k_ = 0;
  std::size_t dim_ = 0;
  int low_bits_ = 0;
  int threads_ = 1;
  std::vector<std::uint64_t> plaquette_masks_;
  // Bit q: plaquette q violated. Parities are linear in x, so the pattern of
  // x is pattern_low_[low bits] ^ pattern_high_[high bits]; likewise sum J z.
  std::vector<std::uint32_t> pattern_low_, pattern_high_;
  std::vector<double> field_low_, field_high_;
  std::vector<double> energy_;
};

std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t update, std::uint64_t shot);

double residual_energy(double e_mean, double e_min, double e_max);

struct UpdateRecord {
  int update = 0;
  int param_index = 0;
  double old_value = 0.0;
  double new_value = 0.0;
  double energy = 0.0;
  double standard_error = 0.0;
  bool accepted = false;
  double best_energy = 0.0;  // accepted reference after this update
};

struct OptimizeOptions {
  int updates = 200;
  int shots = 500;
  double proposal_scale = 0.1;
  int final_shots = 5000;
  bool remeasure = false;  // re-estimate the reference alongside each proposal
  std::uint64_t seed = 0;
  std::function<void(const UpdateRecord&)> on_update;  // progress hook
};

struct QaoaRun {
  QaoaParams params;
  double initial_energy = 0.0;
  std::vector<UpdateRecord> records;
  EnergyEstimate final_energy;
  double final_residual = 0.0;
  std::uint64_t seed = 0;
};

QaoaRun stochastic_optimize(const QaoaSimulator& sim, int depth, const NoiseModel& noise,
                            const Extrema& extrema, const OptimizeOptions& options);

struct EnsembleRow {
  double p4 = 0.0;
  int run = 0;
  double final_residual = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

// Linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

std::vector<EnsembleRow> run_ensemble(const QaoaSimulator& sim, int depth, double p1,
                                      const std::vector<double>& p4_levels, int runs,
                                      const Extrema& extrema, const OptimizeOptions& options,
                                      std::vector<QaoaRun>* all_runs = nullptr);

}  // namespace rydpar
