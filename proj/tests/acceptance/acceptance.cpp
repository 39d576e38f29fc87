// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. RYDPAR_ACCEPT_FULL=1 runs the QAOA ensemble
// at high plaquette noise even when it cannot fit the time budget.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dense_qaoa.hpp"
#include "oracles.hpp"
#include "rydpar/encoding.hpp"
#include "rydpar/io.hpp"
#include "rydpar/open_system.hpp"
#include "rydpar/plaquette.hpp"
#include "rydpar/qaoa.hpp"
#include "rydpar/ramps.hpp"
#include "rydpar/two_pause.hpp"

using namespace rydpar;

namespace {

constexpr double kV = 251.327;
constexpr double kTwoPi = 2.0 * kPi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const GateCalibration& fixture() {
  static const GateCalibration cal =
      calibration_from_json(read_json_file(RYDPAR_FIXTURE_DIR "/calibration.json"));
  return cal;
}

double circular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

// 1. Omega = 0 sector spectra against the closed form.
Outcome sector_closed_form() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> det(-3.0 * kV, 3.0 * kV), inter(1.0, 2.0 * kV);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const double d = det(rng), v = inter(rng);
    for (int n = 1; n <= 4; ++n) {
      std::vector<double> want;
      for (int k = 0; k <= n; ++k) want.push_back(-k * d + k * (k - 1) * v / 2.0);
      std::sort(want.begin(), want.end());
      const Eigen::VectorXd got = sector_spectrum(n, {0.0, d}, {v}).energies;
      const double scale = std::max({std::abs(d), v, 1.0});
      for (int k = 0; k <= n; ++k) worst = std::max(worst, std::abs(got[k] - want[k]) / scale);
    }
  }
  return {worst <= 1e-12, fmt("max relative deviation %.2e", worst)};
}

// 2. Sector eigenvalues against the symmetric part of the 2^n spectrum.
Outcome sector_vs_full() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> rabi(0.0, 2.0 * kV), det(-3.0 * kV, 3.0 * kV),
      inter(1.0, 2.0 * kV);
  double worst = 0.0, worst_member = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const double o = rabi(rng), d = det(rng), v = inter(rng);
    for (int n = 1; n <= 4; ++n) {
      const Eigen::VectorXd got = sector_spectrum(n, {o, d}, {v}).energies;
      const std::vector<double> sym = oracle::symmetric_eigenvalues(n, o, d, v);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(
          oracle::full_plaquette_hamiltonian(n, o, d, v), Eigen::EigenvaluesOnly);
      for (int k = 0; k <= n; ++k) {
        worst = std::max(worst, std::abs(got[k] - sym[k]));
        // every sector level is also a level of the full space
        const Eigen::VectorXd& all = full.eigenvalues();
        worst_member = std::max(worst_member, (all.array() - got[k]).abs().minCoeff());
      }
    }
  }
  return {worst <= 1e-10 && worst_member <= 1e-10,
          fmt("max deviation %.2e, max distance to full spectrum %.2e", worst, worst_member)};
}

// Independent phase integration: own Dicke-basis matrix, dense eigensolver,
// adaptive Gauss-Kronrod over each segment, and the sign of the followed
// ground vector.
class PhaseOracle {
 public:
  explicit PhaseOracle(double interaction) : v_(interaction) {}

  std::array<double, 2> differences(const PiecewisePulse& pulse) {
    std::array<double, 5> phi{};
    for (const PulseSegment& seg : pulse.segments()) {
      const auto part = segment_phases(seg);
      for (int n = 0; n <= 4; ++n) phi[n] += part[n];
    }
    return {phi[0] + phi[4] - phi[1] - phi[3], 2.0 * phi[2] - phi[1] - phi[3]};
  }

 private:
  Eigen::MatrixXd dicke(int n, LaserPoint p) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int k = 0; k <= n; ++k) {
      h(k, k) = -k * p.detuning + k * (k - 1) * v_ / 2.0;
      if (k < n) h(k, k + 1) = h(k + 1, k) = 0.5 * p.rabi * std::sqrt((k + 1.0) * (n - k));
    }
    return h;
  }

  double ground_energy(int n, LaserPoint p) const {
    if (n == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dicke(n, p), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  }

  Eigen::VectorXd ground_vector(int n, LaserPoint p) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dicke(n, p));
    Eigen::VectorXd g = es.eigenvectors().col(0);
    Eigen::Index big = 0;
    g.cwiseAbs().maxCoeff(&big);
    return g[big] < 0.0 ? Eigen::VectorXd(-g) : g;
  }

  std::array<double, 5> segment_phases(const PulseSegment& seg) {
    std::array<double, 5> out{};
    if (const auto* h = std::get_if<HoldSegment>(&seg)) {
      for (int n = 1; n <= 4; ++n) out[n] = -ground_energy(n, h->point) * h->duration;
      return out;
    }
    const auto& ramp = std::get<RampSegment>(seg);
    for (const auto& [key, value] : cache_)
      if (key == ramp) return value;
    for (int n = 1; n <= 4; ++n) {
      auto f = [&](double tau) { return ground_energy(n, segment_at(seg, tau)); };
      const double e = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          f, 0.0, ramp.duration, 12, 1e-11);
      // follow the ground vector continuously from its gauge at the start
      const int samples = 4000;
      Eigen::VectorXd prev = ground_vector(n, segment_at(seg, 0.0));
      for (int i = 1; i <= samples; ++i) {
        Eigen::VectorXd cur = ground_vector(n, segment_at(seg, ramp.duration * i / samples));
        if (cur.dot(prev) < 0.0) cur = -cur;
        prev = cur;
      }
      const double sign = prev.dot(ground_vector(n, segment_at(seg, ramp.duration)));
      out[n] = -e + (sign < 0.0 ? kPi : 0.0);
    }
    cache_.emplace_back(ramp, out);
    return out;
  }

  double v_;
  std::vector<std::pair<RampSegment, std::array<double, 5>>> cache_;
};

// 3. Hold times reproduce the targets.
Outcome two_pause_round_trip() {
  const GateCalibration& cal = fixture();
  PhaseOracle oracle(cal.config.interaction);
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(rng), b = u(rng);
    const auto d = oracle.differences(gate_for_targets(cal, a, b).pulse);
    worst = std::max({worst, circular_distance(d[0], a), circular_distance(d[1], b)});
  }
  return {worst <= 1e-6, fmt("100 targets, max phase error %.2e rad", worst)};
}

CalibrationOptions level_options() {
  // Longer ramps accumulate larger ramp phases, so allow more windings than
  // the fixture was calibrated with.
  CalibrationOptions o;
  o.optimize_ramps = false;
  o.grid = fixture().grid;
  o.interior = fixture().interior;
  o.m_max = 32;
  return o;
}

GateCalibration level(double epsilon) {
  const GateCalibration& fx = fixture();
  return calibrate_waypoints(fx.waypoints, fx.box, fx.config, epsilon, level_options());
}

double coherent_gamma_pi_fidelity(const GateCalibration& cal) {
  const GatePulse g = gate_for_gamma(cal, kPi);
  return coherent_average_fidelity(coherent_gate_channel(g.pulse, g.pulse, cal.config), kPi);
}

// 4. Coherent gamma = pi gate and its improvement at tighter adiabaticity.
Outcome gate_at_pi() {
  const GateCalibration& fx = fixture();
  const bool setup = fx.config.interaction == kV && fx.box.rabi_max == kV &&
                     fx.epsilon == 1e-3 && fx.box.contains(fx.waypoints);
  const double f3 = coherent_gamma_pi_fidelity(fx);
  const double f4 = coherent_gamma_pi_fidelity(level(1e-4));
  return {setup && f3 >= 0.99 && 1.0 - f4 < 1.0 - f3,
          fmt("F(eps=1e-3) = %.5f, F(eps=1e-4) = %.6f", f3, f4)};
}

// 5. Optimized ramps beat the straight ramp, and an interior waypoint helps.
Outcome qab_superiority() {
  const GateCalibration& fx = fixture();
  RampProblem prob;
  prob.start = fx.waypoints.start();
  prob.end = fx.waypoints.point_a();
  prob.epsilon = 1e-3;
  prob.bounds = {kV, -3.0 * kV, kV, 0.0, 1.0};
  RampOptions o;
  o.budget = 40;
  o.seed = 505;
  prob.interior = 0;
  const OptimizedRamp m0 = optimize_ramp(prob, fx.config, o);
  // start the richer search from the best exponent found without waypoints
  o.initial_q = m0.path.exponent();
  prob.interior = 1;
  const OptimizedRamp m1 = optimize_ramp(prob, fx.config, o);
  const OptimizedRamp lin = linear_reference(prob, fx.config);
  const double t1 = m1.report.duration, t0 = m0.report.duration, tl = lin.report.duration;
  const double gap10 = 1.0 - t1 / t0, gap0l = 1.0 - t0 / tl;
  return {gap10 >= 0.05 && gap0l >= 0.05,
          fmt("T(M=1) = %.4f us, T(M=0) = %.4f us, T(linear) = %.4f us, gaps %.1f%% and %.1f%%",
              t1, t0, tl, 100.0 * gap10, 100.0 * gap0l)};
}

// 6. With Rydberg decay the error is smallest at an intermediate duration.
Outcome dissipative_optimum() {
  // Ramp time goes roughly as eps^(-1/2): a factor 16 in eps is about 4x in
  // duration.
  const std::vector<double> eps{1.6e-2, 1e-3, 6.25e-5};
  ErrorCurveOptions eo;
  eo.samples = 50;
  eo.decay = DecayModel{};
  eo.seed = 606;
  std::vector<GateCalibration> cals;
  for (double e : eps) cals.push_back(level(e));
  std::vector<ErrorCurveRow> rows;
  for (const auto& c : cals) rows.push_back(error_level(c, eo));
  std::string d;
  for (std::size_t i = 0; i < rows.size(); ++i)
    d += fmt("%seps %.3g: ramps %.3f us, error %.5f +- %.5f", i ? "; " : "", eps[i],
             cals[i].ramp_time(), rows[i].mean_error, rows[i].standard_error);
  d += fmt("; ramp-time ratios %.2f and %.2f", cals[1].ramp_time() / cals[0].ramp_time(),
           cals[2].ramp_time() / cals[1].ramp_time());
  const bool pass =
      rows[1].mean_error < rows[0].mean_error && rows[1].mean_error < rows[2].mean_error;
  return {pass, d};
}

// 7. Average-fidelity anchors.
Outcome fidelity_anchors() {
  double worst = 0.0;
  for (double g : {0.0, 1.0, kPi}) {
    const GateTarget t = GateTarget::from_gamma(g);
    GateAmplitudes a{};
    for (int z = 0; z < 16; ++z) a[z] = t.amplitude(z);
    worst = std::max({worst, std::abs(average_gate_fidelity(unitary_channel(a), t) - 1.0),
                      std::abs(average_gate_fidelity(depolarizing_channel(), g) - 1.0 / 16.0),
                      std::abs(average_gate_fidelity(zero_channel(), g) - 1.0 / 17.0)});
  }
  worst = std::max(worst, std::abs(average_gate_fidelity(identity_channel(), 0.0) - 1.0));
  return {worst <= 1e-12, fmt("max deviation %.2e", worst)};
}

// 8. Pauli-frame trajectories against the exact noisy density matrix.
Outcome trajectory_equivalence() {
  const ParityLayout l = encode_complete_bipartite(2, 2, {{0.8, -0.45}, {0.35, 0.6}});
  const QaoaSimulator sim(l);
  const oracle::DenseQaoa dense(l);
  QaoaParams p = QaoaParams::zeros(2);
  p.alpha = {0.45, -0.2};
  p.beta = {0.3, 0.55};
  p.gamma = {-0.4, 0.2};
  bool pass = l.num_qubits() == 4;
  std::string d;
  for (double p4 : {0.1, 1.0}) {
    const NoiseModel n{5e-4, p4};
    const double exact = dense.expectation(dense.run(p, n));
    const EnergyEstimate est = sim.estimate_energy(p, n, 100000, 808, 0);
    const double z = std::abs(est.mean - exact) / est.standard_error;
    pass = pass && z <= 3.0;
    d += fmt("%sp4 = %g: exact %.5f, sampled %.5f, %.2f sigma", d.empty() ? "" : "; ", p4, exact,
             est.mean, z);
  }
  return {pass, d};
}

ParityLayout layout_4x5() {
  const json j = read_json_file(RYDPAR_FIXTURE_DIR "/bipartite_4x5.json").at("bipartite");
  return encode_complete_bipartite(4, 5, j.at("couplings").get<std::vector<std::vector<double>>>());
}

double uniform_residual(const std::vector<double>& energies, const Extrema& ex) {
  double sum = 0.0;
  for (double e : energies) sum += e;
  return residual_energy(sum / energies.size(), ex.e_min, ex.e_max);
}

// 9. End-to-end noisy QAOA at K = 20.
Outcome qaoa_end_to_end(double budget) {
  const auto t0 = Clock::now();
  const ParityLayout l = layout_4x5();
  QaoaSimulator sim(l);
  sim.set_threads(std::max(1u, std::thread::hardware_concurrency()));
  const Extrema ex = enumerate_extrema(l);
  const double uniform = uniform_residual(sim.energies(), ex);
  OptimizeOptions o;
  o.updates = 200;
  o.shots = 500;
  o.seed = 909;
  const int runs = 10;
  const double p1 = 5e-4;

  std::vector<QaoaRun> low_runs;
  const auto low = run_ensemble(sim, 3, p1, {1e-4}, runs, ex, o, &low_runs);
  bool monotone = true;
  for (const QaoaRun& r : low_runs)
    for (std::size_t i = 1; i < r.records.size(); ++i)
      monotone = monotone && r.records[i].best_energy <= r.records[i - 1].best_energy;
  const double median_low = low.front().median;
  const bool below_uniform = median_low < uniform - 0.05;
  std::string d = fmt("(a) %s; (b) median %.4f vs uniform %.4f", monotone ? "monotone" : "NOT monotone",
                      median_low, uniform);

  // (c): one noisy estimate at p4 = 0.1 costs a full resimulation per shot,
  // so project the ensemble before committing to it.
  const QaoaParams probe = low_runs.front().params;
  const auto tp = Clock::now();
  sim.estimate_energy(probe, {p1, 0.1}, o.shots, o.seed, 0);
  const double per_estimate = seconds_since(tp);
  const double projected =
      runs * (o.updates + 1 + static_cast<double>(o.final_shots) / o.shots) * per_estimate;
  const double remaining = budget - seconds_since(t0);
  const char* full = std::getenv("RYDPAR_ACCEPT_FULL");
  if (projected > remaining && !(full && std::string(full) == "1")) {
    d += fmt("; (c) not run: projected %.0f s exceeds the remaining %.0f s (set "
             "RYDPAR_ACCEPT_FULL=1 to run it)",
             projected, remaining);
    return {false, d};
  }
  const auto high = run_ensemble(sim, 3, p1, {0.1}, runs, ex, o);
  const double median_high = high.front().median;
  const bool ordered = median_high >= median_low;
  d += fmt("; (c) median at p4 = 0.1 %.4f", median_high);
  return {monotone && below_uniform && ordered, d};
}

// 10. Exhaustive extrema of the K = 20 layout.
Outcome exhaustive_extrema() {
  const ParityLayout l = layout_4x5();
  const Extrema ex = enumerate_extrema(l);
  const bool valid = l.num_qubits() == 20 && violated_plaquettes(ex.argmin, l).empty() &&
                     std::abs(parity_energy(ex.argmin, l) - ex.e_min) < 1e-9 &&
                     std::abs(parity_energy(ex.argmax, l) - ex.e_max) < 1e-9;
  // The constrained minimum is the logical minimum shifted by the penalty
  // of all satisfied plaquettes.
  const json j = read_json_file(RYDPAR_FIXTURE_DIR "/bipartite_4x5.json").at("bipartite");
  const auto jab = j.at("couplings").get<std::vector<std::vector<double>>>();
  double logical_min = 1e300;
  for (int s = 0; s < (1 << 9); ++s) {
    double e = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 5; ++b) {
        const int sa = (s >> a) & 1 ? -1 : 1, sb = (s >> (4 + b)) & 1 ? -1 : 1;
        e += jab[a][b] * sa * sb;
      }
    logical_min = std::min(logical_min, e);
  }
  const double want = logical_min - l.penalty_strength * static_cast<double>(l.plaquettes.size());
  const bool matches = std::abs(want - ex.e_min) < 1e-9;
  return {valid && matches, fmt("E_min %.6f (logical reference %.6f), E_max %.6f", ex.e_min,
                                want, ex.e_max)};
}

struct Criterion {
  int id;
  const char* name;
  double limit;  // seconds; 0 means none
  std::function<Outcome(double)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "sector spectrum closed form", 1.0, [](double) { return sector_closed_form(); }},
      {2, "sector vs full-space eigenvalues", 5.0, [](double) { return sector_vs_full(); }},
      {3, "two-pause phase round trip", 60.0, [](double) { return two_pause_round_trip(); }},
      {4, "coherent gate at gamma = pi", 600.0, [](double) { return gate_at_pi(); }},
      {5, "optimized ramp durations", 600.0, [](double) { return qab_superiority(); }},
      {6, "dissipative optimum", 1800.0, [](double) { return dissipative_optimum(); }},
      {7, "average fidelity anchors", 0.0, [](double) { return fidelity_anchors(); }},
      {8, "trajectory vs exact channel", 120.0, [](double) { return trajectory_equivalence(); }},
      {9, "noisy QAOA end to end", 3600.0, [](double b) { return qaoa_end_to_end(b); }},
      {10, "exhaustive extrema", 120.0, [](double) { return exhaustive_extrema(); }},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run(c.limit);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(t0);
    const bool in_time = c.limit == 0.0 || elapsed <= c.limit;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %s: %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), elapsed,
                in_time ? "" : fmt(", limit %.0f s", c.limit).c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
