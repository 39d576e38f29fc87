#pragma once

namespace rydpar {

// Angular units throughout: rad/us for rates, us for times.
struct LaserPoint {
  double rabi = 0.0;
  double detuning = 0.0;

  bool operator==(const LaserPoint&) const = default;
};

struct PlaquetteConfig {
  double interaction = 0.0;  // equal pairwise Rydberg shift V
  static constexpr int size = 4;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383280;

}  // namespace rydpar
