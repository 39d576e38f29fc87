#include "rydpar/two_pause.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rydpar/errors.hpp"
#include "rydpar/optimize.hpp"

namespace rydpar {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

}  // namespace

std::array<double, 6> Waypoints::values() const {
  return {detuning_start, rabi_a, detuning_a, rabi_b, detuning_b, detuning_end};
}

Waypoints Waypoints::from_values(const std::array<double, 6>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

GateBox GateBox::defaults(double interaction, double rabi_max) {
  if (!(interaction > 0.0) || !(rabi_max > 0.0))
    throw InputError("interaction and Rabi limit must be positive");
  return {rabi_max, -3.0 * interaction, 0.0, -3.0 * interaction, interaction, 1e-3};
}

bool GateBox::contains(const Waypoints& w) const {
  auto edge = [&](double d) { return d >= edge_detuning_min && d < edge_detuning_max; };
  auto hold = [&](double d) { return d >= hold_detuning_min && d < hold_detuning_max; };
  auto rabi = [&](double r) { return r > 0.0 && r <= rabi_max; };
  return edge(w.detuning_start) && edge(w.detuning_end) && hold(w.detuning_a) &&
         hold(w.detuning_b) && rabi(w.rabi_a) && rabi(w.rabi_b);
}

Box GateBox::search_box() const {
  const double e = margin * (edge_detuning_max - edge_detuning_min);
  const double h = margin * (hold_detuning_max - hold_detuning_min);
  const double r = margin * rabi_max;
  return {{edge_detuning_min, r, hold_detuning_min, r, hold_detuning_min, edge_detuning_min},
          {edge_detuning_max - e, rabi_max, hold_detuning_max - h, rabi_max,
           hold_detuning_max - h, edge_detuning_max - e}};
}

double wrap_phase(double phi) {
  double r = std::fmod(phi, kTau);
  if (r < 0.0) r += kTau;
  return r >= kTau || r == 0.0 ? 0.0 : r;  // also folds -0 into +0
}

namespace {

double class_phase(const SectorPhases& sp) {
  return sp.total() + (sp.start_k0 * sp.end_k0 < 0.0 ? std::numbers::pi : 0.0);
}

std::array<double, 2> differences(const std::array<double, 5>& phi) {
  return {phi[0] + phi[4] - phi[1] - phi[3], 2.0 * phi[2] - phi[1] - phi[3]};
}

}  // namespace

std::array<double, 2> tracked_phase_differences(const PiecewisePulse& pulse,
                                                PlaquetteConfig config, int refinement) {
  std::array<double, 5> phi{};
  for (int n = 0; n <= 4; ++n) phi[n] = class_phase(tracked_phases(pulse, n, config, refinement));
  return differences(phi);
}

PhaseTables compute_phase_tables(const std::array<RampSegment, 3>& ramps,
                                  PlaquetteConfig config, int refinement) {
  const PiecewisePulse pulse({ramps[0], ramps[1], ramps[2]});
  pulse.require_dark_ends();
  PhaseTables t;
  std::array<double, 5> phi{};
  const LaserPoint a = segment_end(ramps[0]), b = segment_end(ramps[1]);
  for (int n = 0; n <= 4; ++n) {
    const SectorPhases sp = tracked_phases(pulse, n, config, refinement);
    for (int v = 0; v < 3; ++v) t.ramp_phase[n][v] = sp.phase[v];
    t.sign_phase[n] = sp.start_k0 * sp.end_k0 < 0.0 ? std::numbers::pi : 0.0;
    phi[n] = class_phase(sp);
    t.index_a[n] = sp.index[0];
    t.index_b[n] = sp.index[1];
    t.energy_a[n] = sector_spectrum(n, a, config).energies[sp.index[0]];
    t.energy_b[n] = sector_spectrum(n, b, config).energies[sp.index[1]];
  }
  const auto d = differences(phi);
  t.ramp_a = d[0];
  t.ramp_b = d[1];
  auto de = [](const std::array<double, 5>& e) {
    const double odd = e[1] + e[3];
    return std::array<double, 2>{odd - e[0] - e[4], odd - 2.0 * e[2]};
  };
  const auto ea = de(t.energy_a), eb = de(t.energy_b);
  t.de_a_at_a = ea[0];
  t.de_b_at_a = ea[1];
  t.de_a_at_b = eb[0];
  t.de_b_at_b = eb[1];
  for (int v = 0; v < 3; ++v) t.durations[v] = ramps[v].duration;
  return t;
}

HoldSolution solve_hold_times(double dphi_a, double dphi_b, const PhaseTables& t, int m_max) {
  if (m_max < 0) throw InputError("winding bound must be nonnegative");
  const double det = t.de_a_at_a * t.de_b_at_b - t.de_a_at_b * t.de_b_at_a;
  if (!(std::abs(det) > 1e-12))
    throw InfeasibleError("pause energy matrix is singular");
  const double ra = dphi_a - t.ramp_a, rb = dphi_b - t.ramp_b;
  HoldSolution best;
  double best_total = std::numeric_limits<double>::infinity();
  for (int ma = -m_max; ma <= m_max; ++ma)
    for (int mb = -m_max; mb <= m_max; ++mb) {
      const double ya = ra + kTau * ma, yb = rb + kTau * mb;
      double ta = (t.de_b_at_b * ya - t.de_a_at_b * yb) / det;
      double tb = (t.de_a_at_a * yb - t.de_b_at_a * ya) / det;
      const double tol = 1e-12 * (1.0 + std::abs(ta) + std::abs(tb));
      if (ta < -tol || tb < -tol) continue;
      ta = std::max(ta, 0.0);
      tb = std::max(tb, 0.0);
      if (ta + tb < best_total) {
        best_total = ta + tb;
        best = {ta, tb, ma, mb};
      }
    }
  if (!std::isfinite(best_total))
    throw InfeasibleError("no nonnegative hold times within winding bound " +
                          std::to_string(m_max) + "; increase m_max");
  return best;
}

WorstCaseHold worst_case_hold(const PhaseTables& tables, int grid, int m_max) {
  if (grid < 16) throw InputError("worst-case grid must be at least 16");
  const double step = kTau / grid;
  WorstCaseHold w{-1.0, 0.0, 0.0};
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double h = solve_hold_times(i * step, j * step, tables, m_max).total();
      if (h > w.hold) w = {h, i * step, j * step};
    }
  const double ca = w.dphi_a, cb = w.dphi_b;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j) {
      const double a = wrap_phase(ca + i * step / 4), b = wrap_phase(cb + j * step / 4);
      const double h = solve_hold_times(a, b, tables, m_max).total();
      if (h > w.hold) w = {h, a, b};
    }
  return w;
}

double GateCalibration::ramp_time() const {
  return tables.durations[0] + tables.durations[1] + tables.durations[2];
}

std::array<RampSegment, 3> GateCalibration::ramp_segments() const {
  return {RampSegment{ramps[0], tables.durations[0]}, RampSegment{ramps[1], tables.durations[1]},
          RampSegment{ramps[2], tables.durations[2]}};
}

Waypoints default_waypoints(const GateBox& box, double interaction) {
  Waypoints w{-interaction, 0.5 * box.rabi_max, -0.5 * interaction,
              0.5 * box.rabi_max, 0.5 * interaction, -interaction};
  if (!box.contains(w)) {
    const Box b = box.search_box();
    std::array<double, 6> mid{};
    for (int i = 0; i < 6; ++i) mid[i] = 0.5 * (b.lower[i] + b.upper[i]);
    w = Waypoints::from_values(mid);
  }
  return w;
}

GateCalibration calibrate_waypoints(const Waypoints& w, const GateBox& box,
                                    PlaquetteConfig config, double epsilon,
                                    const CalibrationOptions& opt) {
  if (!box.contains(w)) throw InputError("waypoints outside the experiment box");
  GateCalibration cal;
  cal.waypoints = w;
  cal.config = config;
  cal.box = box;
  cal.epsilon = epsilon;
  cal.interior = opt.interior;
  cal.m_max = opt.m_max;
  cal.grid = opt.grid;
  cal.seed = opt.seed;
  cal.tracked = dark_tracked_indices(w.start(), config);

  const std::array<std::pair<LaserPoint, LaserPoint>, 3> legs{
      {{w.start(), w.point_a()}, {w.point_a(), w.point_b()}, {w.point_b(), w.end()}}};
  std::array<RampSegment, 3> segs;
  for (int v = 0; v < 3; ++v) {
    RampProblem p;
    p.start = legs[v].first;
    p.end = legs[v].second;
    p.interior = opt.interior;
    p.epsilon = epsilon;
    p.tracked = cal.tracked;
    p.bounds = {box.rabi_max, std::min(box.edge_detuning_min, box.hold_detuning_min),
                std::max(box.edge_detuning_max, box.hold_detuning_max), 0.0, 1.0};
    if (opt.optimize_ramps) {
      const OptimizedRamp r = optimize_ramp(p, config, opt.ramp);
      segs[v] = {r.path, r.report.duration};
    } else {
      AdiabaticPath path = spline_path(p.start, p.end);
      path.tracked = cal.tracked;
      path = reparametrize(path, opt.ramp.initial_q, config, opt.ramp.schedule);
      segs[v] = {path, time_functional(path, epsilon, config, opt.ramp.scan).duration};
    }
    cal.ramps[v] = segs[v].path;
  }
  cal.tables = compute_phase_tables(segs, config);
  cal.worst_hold = worst_case_hold(cal.tables, opt.grid, opt.m_max).hold;
  cal.worst_gate = 2.0 * (cal.ramp_time() + cal.worst_hold);
  cal.evaluations = 1;
  return cal;
}

GateCalibration optimize_waypoints(const GateBox& box, PlaquetteConfig config, double epsilon,
                                   const CalibrationOptions& opt) {
  if (opt.budget < 1) throw InputError("calibration budget must be at least 1");
  const Waypoints start = opt.initial ? *opt.initial : default_waypoints(box, config.interaction);
  const auto v0 = start.values();
  constexpr double kPenalty = 1e6;
  // A single ramp longer than half the best gate cannot win, which bounds
  // every later time-functional scan.
  double best_gate = std::numeric_limits<double>::infinity();
  int candidates = 0;
  auto objective = [&](const std::vector<double>& x) {
    std::array<double, 6> v{};
    std::copy(x.begin(), x.end(), v.begin());
    CalibrationOptions o = opt;
    o.ramp.scan.cap = std::min(opt.ramp.scan.cap, 0.5 * best_gate);
    o.on_candidate = nullptr;
    ++candidates;
    double g = std::numeric_limits<double>::infinity();
    try {
      g = calibrate_waypoints(Waypoints::from_values(v), box, config, epsilon, o).worst_gate;
      best_gate = std::min(best_gate, g);
    } catch (const Error&) {
    }
    if (opt.on_candidate) opt.on_candidate(candidates, g, best_gate);
    return std::isfinite(g) ? g : kPenalty;
  };
  HoppingOptions hop;
  hop.hops = opt.budget;
  hop.seed = opt.seed;
  hop.local_evaluations = opt.local_evaluations;
  const OptimizeResult best =
      basin_hopping(objective, box.search_box(), std::vector<double>(v0.begin(), v0.end()), hop);
  if (best.value >= kPenalty) throw InfeasibleError("every waypoint candidate was infeasible");
  std::array<double, 6> v{};
  std::copy(best.x.begin(), best.x.end(), v.begin());
  GateCalibration cal = calibrate_waypoints(Waypoints::from_values(v), box, config, epsilon, opt);
  cal.budget = opt.budget;
  cal.evaluations = best.evaluations;
  return cal;
}

GatePulse gate_for_targets(const GateCalibration& cal, double dphi_a, double dphi_b) {
  GatePulse g;
  g.dphi_a = wrap_phase(dphi_a);
  g.dphi_b = wrap_phase(dphi_b);
  g.hold = solve_hold_times(g.dphi_a, g.dphi_b, cal.tables, cal.m_max);
  const auto r = cal.ramp_segments();
  g.pulse = PiecewisePulse({r[0], HoldSegment{cal.waypoints.point_a(), g.hold.t_a}, r[1],
                            HoldSegment{cal.waypoints.point_b(), g.hold.t_b}, r[2]});
  return g;
}

GatePulse gate_for_gamma(const GateCalibration& cal, double gamma) {
  const double target = wrap_phase(-2.0 * wrap_phase(gamma));
  return gate_for_targets(cal, target, target);
}

ErrorCurveRow error_level(const GateCalibration& cal, const ErrorCurveOptions& opt) {
  if (opt.samples < 1) throw InputError("error curve needs at least one sample");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> phase(0.0, kTau);
  double sum = 0.0, sum2 = 0.0, dur = 0.0;
  for (int s = 0; s < opt.samples; ++s) {
    double da, db;
    if (opt.gamma_only) {
      da = db = wrap_phase(-2.0 * phase(rng));
    } else {
      da = phase(rng);
      db = phase(rng);
    }
    const GatePulse g = gate_for_targets(cal, da, db);
    const GateTarget target = GateTarget::from_phase_differences(g.dphi_a, g.dphi_b);
    double f;
    if (opt.decay) {
      f = average_gate_fidelity(gate_channel(g.pulse, g.pulse, cal.config, *opt.decay, opt.channel),
                                target);
    } else {
      f = coherent_average_fidelity(
          coherent_gate_channel(g.pulse, g.pulse, cal.config, opt.coherent), target);
    }
    sum += 1.0 - f;
    sum2 += (1.0 - f) * (1.0 - f);
    dur += g.gate_time();
  }
  ErrorCurveRow row;
  row.epsilon = cal.epsilon;
  row.gate_time = cal.worst_gate;
  row.samples = opt.samples;
  row.mean_error = sum / opt.samples;
  row.decay_rate = opt.decay ? opt.decay->rate : 0.0;
  const double var = opt.samples > 1
                         ? std::max(0.0, (sum2 - sum * sum / opt.samples) / (opt.samples - 1))
                         : 0.0;
  row.standard_error = std::sqrt(var / opt.samples);
  row.mean_duration = dur / opt.samples;
  return row;
}

std::vector<ErrorCurveRow> error_curve(const std::vector<GateCalibration>& levels,
                                       const ErrorCurveOptions& options) {
  if (options.samples < 10) throw InputError("error curve needs at least 10 samples");
  std::vector<ErrorCurveRow> rows;
  for (const auto& cal : levels) rows.push_back(error_level(cal, options));
  return rows;
}

}  // namespace rydpar
