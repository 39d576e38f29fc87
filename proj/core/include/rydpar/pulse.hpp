#pragma once

#include <variant>
#include <vector>

#include "rydpar/laser.hpp"
#include "rydpar/path.hpp"

namespace rydpar {

struct HoldSegment {
  LaserPoint point;
  double duration = 0.0;
  bool operator==(const HoldSegment&) const = default;
};

struct RampSegment {
  AdiabaticPath path;
  double duration = 0.0;
  bool operator==(const RampSegment&) const = default;
};

using PulseSegment = std::variant<RampSegment, HoldSegment>;

double segment_duration(const PulseSegment& seg);
LaserPoint segment_start(const PulseSegment& seg);
LaserPoint segment_end(const PulseSegment& seg);
// Local time tau in [0, duration].
LaserPoint segment_at(const PulseSegment& seg, double tau);

class PiecewisePulse {
 public:
  PiecewisePulse() = default;
  explicit PiecewisePulse(std::vector<PulseSegment> segments);

  const std::vector<PulseSegment>& segments() const { return segments_; }
  double duration() const;
  LaserPoint at(double t) const;
  LaserPoint start() const;
  LaserPoint end() const;

  // Throws InputError unless Omega vanishes at both ends.
  void require_dark_ends() const;

  bool operator==(const PiecewisePulse&) const = default;

 private:
  std::vector<PulseSegment> segments_;
};

// Straight-line ramp (1 - t/T) p0 + (t/T) p1.
RampSegment linear_ramp(LaserPoint start, LaserPoint end, double duration);

}  // namespace rydpar
