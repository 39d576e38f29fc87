#include "rydpar/ramps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rydpar/errors.hpp"
#include "rydpar/optimize.hpp"

namespace rydpar {

AdiabaticPath spline_path(LaserPoint start, LaserPoint end,
                          const std::vector<LaserPoint>& interior) {
  return AdiabaticPath(start, end, interior);
}

std::array<int, 5> dark_tracked_indices(LaserPoint start, PlaquetteConfig config) {
  if (start.rabi != 0.0) throw InputError("tracked indices need a dark (zero Rabi) start");
  std::array<int, 5> idx{};
  for (int n = 0; n <= 4; ++n) idx[n] = ground_connected_index(n, start, config);
  return idx;
}

namespace {

struct SectorGenerators {
  std::array<Eigen::MatrixXd, 5> drive, detuning;
  SectorGenerators() {
    for (int n = 0; n <= 4; ++n) {
      drive[n] = sector_drive_generator(n);
      detuning[n] = sector_detuning_generator(n);
    }
  }
};

const SectorGenerators& generators() {
  static const SectorGenerators g;
  return g;
}

double tracked_gap(const Eigen::VectorXd& e, int i) {
  double g = std::numeric_limits<double>::infinity();
  if (i > 0) g = std::min(g, e[i] - e[i - 1]);
  if (i + 1 < e.size()) g = std::min(g, e[i + 1] - e[i]);
  return g;
}

void check_tracked(const AdiabaticPath& path) {
  for (int n : path.sectors) {
    if (n < 0 || n > 4) throw InputError("ramp sector outside 0..4");
    if (path.tracked[n] < 0 || path.tracked[n] > n)
      throw InputError("tracked index out of range in sector " + std::to_string(n));
  }
}

// Gap and derivative norms at shape parameter u with the schedule slope applied.
GapAndNorms local_terms(const AdiabaticPath& path, double u, double slope,
                        PlaquetteConfig config) {
  const auto& gen = generators();
  const LaserPoint p = path.shape(u), d1 = path.shape_d1(u), d2 = path.shape_d2(u);
  GapAndNorms out;
  out.gap = std::numeric_limits<double>::infinity();
  for (int n : path.sectors) {
    if (n == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sector_hamiltonian(n, p, config),
                                                      Eigen::EigenvaluesOnly);
    const double g = tracked_gap(es.eigenvalues(), path.tracked[n]);
    if (g < out.gap) {
      out.gap = g;
      out.gap_sector = n;
    }
    out.d1_norm = std::max(
        out.d1_norm,
        slope * spectral_norm(d1.rabi * gen.drive[n] + d1.detuning * gen.detuning[n]));
    out.d2_norm = std::max(
        out.d2_norm,
        slope * slope * spectral_norm(d2.rabi * gen.drive[n] + d2.detuning * gen.detuning[n]));
  }
  out.crossing = out.gap < 1e-9;
  return out;
}

double schedule_slope(const AdiabaticPath& path, double s) {
  if (!path.has_schedule()) return 1.0;
  const auto& sn = path.schedule_s();
  const auto& tn = path.schedule_theta();
  auto it = std::upper_bound(sn.begin() + 1, sn.end() - 1, s);
  const std::size_t j = static_cast<std::size_t>(it - sn.begin()) - 1;
  return (tn[j + 1] - tn[j]) / (sn[j + 1] - sn[j]);
}

std::vector<double> cumulative(const std::vector<double>& rate) {
  std::vector<double> c(rate.size(), 0.0);
  for (std::size_t j = 1; j < rate.size(); ++j) c[j] = c[j - 1] + 0.5 * (rate[j] + rate[j - 1]);
  for (auto& x : c) x /= c.back();
  c.back() = 1.0;
  return c;
}

}  // namespace

GapAndNorms gap_and_norms(const AdiabaticPath& path, double u, PlaquetteConfig config,
                          const std::vector<int>& sectors) {
  if (!(u >= 0.0 && u <= 1.0)) throw InputError("path parameter outside [0, 1]");
  AdiabaticPath copy = path;
  copy.sectors = sectors;
  check_tracked(copy);
  return local_terms(copy, u, 1.0, config);
}

AdiabaticPath reparametrize(const AdiabaticPath& path, double q, PlaquetteConfig config,
                            const ScheduleOptions& options) {
  if (!(q >= 0.0 && q <= 2.0)) throw InputError("reparametrization exponent outside [0, 2]");
  if (options.nodes < 512) throw InputError("schedule needs at least 512 nodes");
  check_tracked(path);
  AdiabaticPath out = path;
  out.clear_schedule();
  if (q == 0.0) return out;

  const int n = options.nodes;
  std::vector<double> grid(n + 1), gap2(n + 1), norm(n + 1);
  double max_norm = 0.0;
  for (int j = 0; j <= n; ++j) {
    grid[j] = double(j) / n;
    const GapAndNorms t = local_terms(path, grid[j], 1.0, config);
    if (t.crossing || !std::isfinite(t.gap))
      throw NumericalError("zero gap along path at u = " + std::to_string(grid[j]));
    gap2[j] = t.gap * t.gap;
    norm[j] = t.d1_norm;
    max_norm = std::max(max_norm, norm[j]);
  }
  if (max_norm == 0.0) return out;  // constant path
  const double floor = 1e-12 * max_norm;

  std::vector<double> s_nodes, theta_nodes;
  if (!options.literal) {
    // s(theta) = (1/c) int_0^theta h^{-1}, h = (g^2/||dH||)^q.
    std::vector<double> inv_h(n + 1);
    for (int j = 0; j <= n; ++j) inv_h[j] = std::pow(std::max(norm[j], floor) / gap2[j], q);
    s_nodes = cumulative(inv_h);
    theta_nodes = grid;
  } else {
    // theta'(s) proportional to (g^2/||dH||)^q evaluated at s itself.
    std::vector<double> rate(n + 1);
    for (int j = 0; j <= n; ++j) rate[j] = std::pow(gap2[j] / std::max(norm[j], floor), q);
    theta_nodes = cumulative(rate);
    s_nodes = grid;
  }
  out.set_schedule(std::move(s_nodes), std::move(theta_nodes), q);
  return out;
}

std::vector<double> ramp_fidelity(const AdiabaticPath& path, double duration,
                                  PlaquetteConfig config, const FidelityOptions& options) {
  if (!(duration > 0.0)) throw InputError("ramp duration must be positive");
  check_tracked(path);
  const PiecewisePulse pulse({RampSegment{path, duration}});
  IntegratorOptions integ;
  integ.step_bound = options.step_bound;
  integ.richardson = options.richardson;
  integ.center_spectrum = true;
  const LaserPoint p0 = path.at(0.0), p1 = path.at(1.0);
  std::vector<double> out;
  for (int n : path.sectors) {
    if (n == 0) {
      out.push_back(1.0);
      continue;
    }
    const int i = path.tracked[n];
    const Eigen::VectorXcd psi0 = sector_spectrum(n, p0, config).vectors.col(i).cast<cplx>();
    const Eigen::VectorXcd psi = evolve_sector_state(pulse, n, config, psi0, integ);
    const Eigen::VectorXcd target = sector_spectrum(n, p1, config).vectors.col(i).cast<cplx>();
    out.push_back(std::norm(target.dot(psi)) / psi.squaredNorm());
  }
  return out;
}

TimeFunctional time_functional(const AdiabaticPath& path, double epsilon,
                               PlaquetteConfig config, const ScanOptions& opt) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InputError("epsilon must lie in (0, 0.5)");
  TimeFunctional out;
  auto worst = [&](double t) {
    ++out.evaluations;
    const auto f = ramp_fidelity(path, t, config, opt.fidelity);
    return f.empty() ? 1.0 : *std::min_element(f.begin(), f.end());
  };
  double t = opt.initial;
  double last_fail = -1.0, run_start = 0.0, run_fidelity = 0.0;
  int run = 0;
  while (run < opt.persistence) {
    if (t > opt.cap)
      throw InfeasibleError("time functional scan exceeded " + std::to_string(opt.cap) + " us");
    const double f = worst(t);
    if (f > 1.0 - epsilon) {
      if (run == 0) {
        run_start = t;
        run_fidelity = f;
      }
      ++run;
    } else {
      run = 0;
      last_fail = t;
    }
    t *= opt.growth;
  }
  if (last_fail < 0.0) {
    out.duration = opt.initial;
    out.degenerate = true;
    out.worst_fidelity = run_fidelity;
    return out;
  }
  double lo = last_fail, hi = run_start;
  out.worst_fidelity = run_fidelity;
  while (hi - lo > opt.relative_width * hi) {
    const double mid = 0.5 * (lo + hi);
    const double f = worst(mid);
    if (f > 1.0 - epsilon) {
      hi = mid;
      out.worst_fidelity = f;
    } else {
      lo = mid;
    }
  }
  out.duration = hi;
  return out;
}

double adiabatic_upper_bound(const AdiabaticPath& path, double epsilon, PlaquetteConfig config,
                             int nodes) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (nodes < 512) throw InputError("bound quadrature needs at least 512 nodes");
  if (nodes % 2) ++nodes;
  check_tracked(path);
  auto terms = [&](double s) {
    const GapAndNorms t = local_terms(path, path.theta(s), schedule_slope(path, s), config);
    if (t.crossing) throw NumericalError("zero gap along path; bound undefined");
    return t;
  };
  const GapAndNorms a = terms(0.0), b = terms(1.0);
  double total = a.d1_norm / (a.gap * a.gap) + b.d1_norm / (b.gap * b.gap);
  const double h = 1.0 / nodes;
  double integral = 0.0;
  for (int j = 0; j <= nodes; ++j) {
    const GapAndNorms t = j == 0 ? a : (j == nodes ? b : terms(j * h));
    const double w = (j == 0 || j == nodes) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    integral += w * (t.d2_norm / (t.gap * t.gap) + t.d1_norm * t.d1_norm / (t.gap * t.gap * t.gap));
  }
  total += integral * h / 3.0;
  // A piecewise-linear schedule contributes point masses to the second derivative.
  if (path.has_schedule()) {
    const auto& sn = path.schedule_s();
    for (std::size_t j = 1; j + 1 < sn.size(); ++j) {
      const double jump = schedule_slope(path, sn[j]) - schedule_slope(path, 0.5 * (sn[j - 1] + sn[j]));
      const GapAndNorms t = local_terms(path, path.theta(sn[j]), 1.0, config);
      total += std::abs(jump) * t.d1_norm / (t.gap * t.gap);
    }
  }
  return total / epsilon;
}

RampReport ramp_report(const AdiabaticPath& path, double epsilon, PlaquetteConfig config,
                       const ScanOptions& scan) {
  RampReport rep;
  rep.sectors = path.sectors;
  rep.epsilon = epsilon;
  const TimeFunctional tf = time_functional(path, epsilon, config, scan);
  rep.duration = tf.duration;
  rep.degenerate = tf.degenerate;
  rep.fidelity = ramp_fidelity(path, tf.duration, config, scan.fidelity);
  for (int n : path.sectors) {
    double g = std::numeric_limits<double>::infinity();
    if (n > 0)
      for (int j = 0; j <= 256; ++j) {
        const auto e = sector_spectrum(n, path.shape(j / 256.0), config).energies;
        g = std::min(g, tracked_gap(e, path.tracked[n]));
      }
    rep.min_gap.push_back(g);
  }
  try {
    rep.bound = adiabatic_upper_bound(path, epsilon, config);
  } catch (const NumericalError&) {
    rep.bound = std::numeric_limits<double>::infinity();
  }
  return rep;
}

namespace {

std::array<int, 5> resolve_tracked(const RampProblem& p, PlaquetteConfig config) {
  if (p.tracked) return *p.tracked;
  if (p.start.rabi == 0.0) return dark_tracked_indices(p.start, config);
  return {0, 0, 0, 0, 0};
}

AdiabaticPath prepare(const RampProblem& p, PlaquetteConfig config,
                      const std::array<int, 5>& tracked, std::vector<LaserPoint> interior) {
  AdiabaticPath path = spline_path(p.start, p.end, interior);
  path.tracked = tracked;
  path.sectors = p.sectors;
  (void)config;
  return path;
}

}  // namespace

OptimizedRamp optimize_ramp(const RampProblem& problem, PlaquetteConfig config,
                            const RampOptions& options) {
  const int m = problem.interior;
  if (m < 0 || m > 4) throw InputError("interior waypoint count outside 0..4");
  if (options.budget < 1) throw InputError("ramp budget must be at least 1");
  const auto tracked = resolve_tracked(problem, config);
  const RampBounds& bd = problem.bounds;

  Box box;
  box.lower.push_back(bd.q_min);
  box.upper.push_back(bd.q_max);
  for (int i = 0; i < m; ++i) {
    box.lower.push_back(0.0);
    box.upper.push_back(bd.rabi_max);
  }
  for (int i = 0; i < m; ++i) {
    box.lower.push_back(bd.detuning_min);
    box.upper.push_back(bd.detuning_max);
  }
  std::vector<double> x0{options.initial_q};
  std::vector<LaserPoint> guess = options.initial_interior;
  if (static_cast<int>(guess.size()) != m) {
    guess.clear();
    for (int i = 1; i <= m; ++i) {
      const double w = double(i) / (m + 1);
      guess.push_back({(1 - w) * problem.start.rabi + w * problem.end.rabi,
                       (1 - w) * problem.start.detuning + w * problem.end.detuning});
    }
  }
  for (const auto& g : guess) x0.push_back(g.rabi);
  for (const auto& g : guess) x0.push_back(g.detuning);

  auto build = [&](const std::vector<double>& x) {
    std::vector<LaserPoint> interior(m);
    for (int i = 0; i < m; ++i) interior[i] = {x[1 + i], x[1 + m + i]};
    return reparametrize(prepare(problem, config, tracked, interior), x[0], config,
                         options.schedule);
  };
  // Scans stop at a multiple of the best duration so far; such candidates
  // score the cutoff itself.
  const double penalty = 10.0 * options.scan.cap;
  double best_so_far = std::numeric_limits<double>::infinity();
  auto objective = [&](const std::vector<double>& x) {
    ScanOptions scan = options.scan;
    const double cutoff = std::min(scan.cap, 4.0 * best_so_far);
    scan.cap = cutoff;
    try {
      const double t = time_functional(build(x), problem.epsilon, config, scan).duration;
      best_so_far = std::min(best_so_far, t);
      return t;
    } catch (const InfeasibleError&) {
      return cutoff < options.scan.cap ? cutoff : penalty;
    } catch (const Error&) {
      return penalty;
    }
  };

  AnnealingOptions ann;
  ann.max_iterations = options.budget;
  ann.seed = options.seed;
  ann.local_evaluations = options.local_evaluations;
  const OptimizeResult best = dual_annealing(objective, box, x0, ann);
  if (best.value >= penalty)
    throw InfeasibleError("no feasible ramp found: every candidate collapsed the gap");

  OptimizedRamp out;
  out.path = build(best.x);
  out.report = ramp_report(out.path, problem.epsilon, config, options.scan);
  out.evaluations = best.evaluations;
  out.seed = options.seed;
  return out;
}

OptimizedRamp linear_reference(const RampProblem& problem, PlaquetteConfig config,
                               const ScanOptions& scan) {
  OptimizedRamp out;
  out.path = prepare(problem, config, resolve_tracked(problem, config), {});
  out.report = ramp_report(out.path, problem.epsilon, config, scan);
  return out;
}

}  // namespace rydpar
