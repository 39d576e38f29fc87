#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace rydpar {

using Objective = std::function<double(const std::vector<double>&)>;

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  std::vector<double> clip(std::vector<double> x) const;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
};

// Nelder-Mead with candidates clipped into the box.
OptimizeResult nelder_mead(const Objective& f, const Box& box, std::vector<double> x0,
                           int max_evaluations, double initial_scale = 0.05,
                           double xtol = 1e-6);

// Generalized simulated annealing with a Tsallis visiting distribution,
// following the classic dual-annealing layout: each outer step visits 2*dim
// candidates (full moves, then single-coordinate moves) and a bounded
// Nelder-Mead refinement runs whenever the best value improves.
struct AnnealingOptions {
  int max_iterations = 100;  // outer steps, the initial evaluation counts as one
  double initial_temperature = 5230.0;
  double visiting = 2.62;
  double accept = -5.0;
  int local_evaluations = 40;
  std::uint64_t seed = 0;
};

OptimizeResult dual_annealing(const Objective& f, const Box& box, std::vector<double> x0,
                              const AnnealingOptions& options);

struct HoppingOptions {
  int hops = 100;  // evaluated candidates including the initial one
  double step_fraction = 0.1;        // perturbation half-width / box width
  double temperature_fraction = 0.1;  // Metropolis temperature / initial value
  int local_evaluations = 20;
  std::uint64_t seed = 0;
};

OptimizeResult basin_hopping(const Objective& f, const Box& box, std::vector<double> x0,
                             const HoppingOptions& options);

}  // namespace rydpar
