#pragma once

#include <array>
#include <vector>

#include "rydpar/laser.hpp"
#include "rydpar/spline.hpp"

namespace rydpar {

// Spline path through (Omega, Delta) waypoints at equally spaced abscissae,
// optionally traversed with a tabulated monotone schedule u = theta(s).
class AdiabaticPath {
 public:
  AdiabaticPath() : AdiabaticPath(LaserPoint{}, LaserPoint{}) {}
  AdiabaticPath(LaserPoint start, LaserPoint end, std::vector<LaserPoint> interior = {});

  const LaserPoint& start() const { return start_; }
  const LaserPoint& end() const { return end_; }
  const std::vector<LaserPoint>& interior() const { return interior_; }
  int num_interior() const { return static_cast<int>(interior_.size()); }

  // Unscheduled shape f(u); Omega clamped at zero.
  LaserPoint shape(double u) const;
  LaserPoint shape_d1(double u) const;
  LaserPoint shape_d2(double u) const;

  // Scheduled point f(theta(s)).
  LaserPoint at(double s) const { return shape(theta(s)); }

  double theta(double s) const;
  bool has_schedule() const { return !s_nodes_.empty(); }
  // Nodes (s_j, theta_j); both strictly increasing from 0 to 1.
  void set_schedule(std::vector<double> s_nodes, std::vector<double> theta_nodes, double q);
  void clear_schedule();
  const std::vector<double>& schedule_s() const { return s_nodes_; }
  const std::vector<double>& schedule_theta() const { return theta_nodes_; }
  double exponent() const { return q_; }

  // Eigen-index followed in sectors 0..4; sectors the ramp is optimized for.
  std::array<int, 5> tracked{0, 0, 0, 0, 0};
  std::vector<int> sectors{1, 2, 3, 4};

  bool operator==(const AdiabaticPath& other) const;

 private:
  LaserPoint start_, end_;
  std::vector<LaserPoint> interior_;
  CubicSpline rabi_, detuning_;
  std::vector<double> s_nodes_, theta_nodes_;
  double q_ = 0.0;
};

}  // namespace rydpar
