#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rydpar {

struct LogicalTerm {
  std::vector<int> support;  // sorted, distinct logical indices
  double coupling = 0.0;
};

struct LogicalProblem {
  int num_logical = 0;
  std::vector<LogicalTerm> terms;

  // Throws InputError on unsorted/duplicate/out-of-range supports.
  void validate() const;
};

struct ParityQubit {
  int id = 0;
  int row = 0;
  int col = 0;
  std::vector<int> logical_support;
  double local_field = 0.0;
};

struct Plaquette {
  std::vector<int> members;  // qubit ids, 3 or 4 of them
};

struct ParityLayout {
  int grid_rows = 0;
  int grid_cols = 0;
  std::vector<ParityQubit> qubits;
  std::vector<Plaquette> plaquettes;
  double penalty_strength = 0.0;

  int num_qubits() const { return static_cast<int>(qubits.size()); }
  int num_logical() const;
  // Sum of |J| + 1, the smallest integer-offset penalty that keeps the
  // constrained subspace below every violating configuration.
  double default_penalty() const;
};

// ±1 per physical qubit.
using SpinConfiguration = std::vector<int>;

ParityLayout encode_complete_bipartite(
    int n_a, int n_b, const std::vector<std::vector<double>>& couplings);

// Accepts problems whose terms form a complete bipartite interaction graph;
// anything else needs a hand-written layout.
ParityLayout encode_problem(const LogicalProblem& problem);

struct LayoutViolation {
  int plaquette = -1;
  std::vector<int> odd_indices;
  bool non_contiguous = false;
  std::string message;
};

std::vector<LayoutViolation> validate_layout(const ParityLayout& layout);

double parity_energy(const SpinConfiguration& config, const ParityLayout& layout);

// Plaquettes whose member product is -1.
std::vector<int> violated_plaquettes(const SpinConfiguration& config,
                                     const ParityLayout& layout);

struct Extrema {
  double e_min = 0.0;
  double e_max = 0.0;
  SpinConfiguration argmin;
  SpinConfiguration argmax;
};

Extrema enumerate_extrema(const ParityLayout& layout);

struct DecodeResult {
  bool ok = false;
  std::vector<int> logical;             // ±1, valid when ok
  std::vector<int> violated_plaquettes; // populated on failure
  std::string message;
};

DecodeResult decode(const SpinConfiguration& config, const ParityLayout& layout);

// Physical parities induced by a logical assignment.
SpinConfiguration encode_logical(const std::vector<int>& logical,
                                 const ParityLayout& layout);

std::vector<std::vector<int>> schedule_illumination(const ParityLayout& layout);

// Bit k set <=> qubit k reads -1. Used by the statevector code.
SpinConfiguration config_from_bits(std::uint64_t bits, int num_qubits);
std::uint64_t bits_from_config(const SpinConfiguration& config);

}  // namespace rydpar
