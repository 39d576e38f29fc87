#include "rydpar/pulse.hpp"

#include <cmath>

#include "rydpar/errors.hpp"

namespace rydpar {

double segment_duration(const PulseSegment& seg) {
  return std::visit([](const auto& s) { return s.duration; }, seg);
}

LaserPoint segment_start(const PulseSegment& seg) {
  if (const auto* r = std::get_if<RampSegment>(&seg)) return r->path.at(0.0);
  return std::get<HoldSegment>(seg).point;
}

LaserPoint segment_end(const PulseSegment& seg) {
  if (const auto* r = std::get_if<RampSegment>(&seg)) return r->path.at(1.0);
  return std::get<HoldSegment>(seg).point;
}

LaserPoint segment_at(const PulseSegment& seg, double tau) {
  if (const auto* r = std::get_if<RampSegment>(&seg))
    return r->duration > 0.0 ? r->path.at(tau / r->duration) : r->path.at(0.0);
  return std::get<HoldSegment>(seg).point;
}

PiecewisePulse::PiecewisePulse(std::vector<PulseSegment> segments)
    : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const double d = segment_duration(segments_[i]);
    if (!(d >= 0.0) || !std::isfinite(d))
      throw InputError("segment " + std::to_string(i) + " has invalid duration");
    if (segment_start(segments_[i]).rabi < 0.0 || segment_end(segments_[i]).rabi < 0.0)
      throw InputError("segment " + std::to_string(i) + " has negative Rabi frequency");
    if (i == 0) continue;
    const LaserPoint a = segment_end(segments_[i - 1]);
    const LaserPoint b = segment_start(segments_[i]);
    const double scale = 1.0 + std::abs(a.rabi) + std::abs(a.detuning);
    if (std::abs(a.rabi - b.rabi) > 1e-9 * scale ||
        std::abs(a.detuning - b.detuning) > 1e-9 * scale)
      throw InputError("pulse is discontinuous between segments " + std::to_string(i - 1) +
                       " and " + std::to_string(i));
  }
}

double PiecewisePulse::duration() const {
  double t = 0.0;
  for (const auto& s : segments_) t += segment_duration(s);
  return t;
}

LaserPoint PiecewisePulse::at(double t) const {
  if (segments_.empty()) return {};
  for (const auto& s : segments_) {
    const double d = segment_duration(s);
    if (t <= d) return segment_at(s, std::max(t, 0.0));
    t -= d;
  }
  return end();
}

LaserPoint PiecewisePulse::start() const {
  return segments_.empty() ? LaserPoint{} : segment_start(segments_.front());
}

LaserPoint PiecewisePulse::end() const {
  return segments_.empty() ? LaserPoint{} : segment_end(segments_.back());
}

void PiecewisePulse::require_dark_ends() const {
  if (start().rabi != 0.0 || end().rabi != 0.0)
    throw InputError("pulse must start and end with zero Rabi frequency");
}

RampSegment linear_ramp(LaserPoint start, LaserPoint end, double duration) {
  if (!(duration > 0.0)) throw InputError("linear ramp duration must be positive");
  return {AdiabaticPath(start, end), duration};
}

}  // namespace rydpar
