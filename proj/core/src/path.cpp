#include "rydpar/path.hpp"

#include <algorithm>
#include <cmath>

#include "rydpar/errors.hpp"

namespace rydpar {

AdiabaticPath::AdiabaticPath(LaserPoint start, LaserPoint end, std::vector<LaserPoint> interior)
    : start_(start), end_(end), interior_(std::move(interior)) {
  if (interior_.size() > 4) throw InputError("at most 4 interior waypoints supported");
  const std::size_t n = interior_.size() + 2;
  std::vector<double> u(n), om(n), de(n);
  for (std::size_t m = 0; m < n; ++m) {
    u[m] = static_cast<double>(m) / static_cast<double>(n - 1);
    const LaserPoint& p = m == 0 ? start_ : (m + 1 == n ? end_ : interior_[m - 1]);
    if (!std::isfinite(p.rabi) || !std::isfinite(p.detuning))
      throw InputError("path waypoint is not finite");
    om[m] = p.rabi;
    de[m] = p.detuning;
  }
  u.back() = 1.0;
  rabi_ = CubicSpline(u, om);
  detuning_ = CubicSpline(std::move(u), de);
}

LaserPoint AdiabaticPath::shape(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  return {std::max(0.0, rabi_.value(u)), detuning_.value(u)};
}

LaserPoint AdiabaticPath::shape_d1(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const double om = rabi_.value(u) >= 0.0 ? rabi_.derivative(u) : 0.0;
  return {om, detuning_.derivative(u)};
}

LaserPoint AdiabaticPath::shape_d2(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const double om = rabi_.value(u) >= 0.0 ? rabi_.second_derivative(u) : 0.0;
  return {om, detuning_.second_derivative(u)};
}

double AdiabaticPath::theta(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  if (s_nodes_.empty()) return s;
  auto it = std::upper_bound(s_nodes_.begin() + 1, s_nodes_.end() - 1, s);
  const std::size_t j = static_cast<std::size_t>(it - s_nodes_.begin()) - 1;
  const double w = (s - s_nodes_[j]) / (s_nodes_[j + 1] - s_nodes_[j]);
  return theta_nodes_[j] + w * (theta_nodes_[j + 1] - theta_nodes_[j]);
}

void AdiabaticPath::set_schedule(std::vector<double> s_nodes, std::vector<double> theta_nodes,
                                 double q) {
  if (s_nodes.size() < 2 || s_nodes.size() != theta_nodes.size())
    throw InputError("schedule needs at least two matching nodes");
  if (s_nodes.front() != 0.0 || s_nodes.back() != 1.0 || theta_nodes.front() != 0.0 ||
      theta_nodes.back() != 1.0)
    throw InputError("schedule must map 0 to 0 and 1 to 1");
  for (std::size_t j = 1; j < s_nodes.size(); ++j)
    if (!(s_nodes[j] > s_nodes[j - 1]) || !(theta_nodes[j] > theta_nodes[j - 1]))
      throw InputError("schedule must be strictly increasing");
  s_nodes_ = std::move(s_nodes);
  theta_nodes_ = std::move(theta_nodes);
  q_ = q;
}

void AdiabaticPath::clear_schedule() {
  s_nodes_.clear();
  theta_nodes_.clear();
  q_ = 0.0;
}

bool AdiabaticPath::operator==(const AdiabaticPath& o) const {
  return start_ == o.start_ && end_ == o.end_ && interior_ == o.interior_ &&
         s_nodes_ == o.s_nodes_ && theta_nodes_ == o.theta_nodes_ && q_ == o.q_ &&
         tracked == o.tracked && sectors == o.sectors;
}

}  // namespace rydpar
