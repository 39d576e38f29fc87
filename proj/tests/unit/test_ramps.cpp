#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rydpar/errors.hpp"
#include "rydpar/ramps.hpp"

using namespace rydpar;

namespace {

constexpr double kV = 251.327;
const PlaquetteConfig kConfig{kV};

// Fourth-order Magnus propagator of a sector-free full-space ramp.
Eigen::VectorXcd full_space_state(int n, const AdiabaticPath& path, double duration, int steps) {
  const int dim = 1 << n;
  auto h = [&](double t) {
    const LaserPoint p = path.at(t / duration);
    return oracle::full_plaquette_hamiltonian(n, p.rabi, p.detuning, kV);
  };
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi[0] = 1.0;
  const double dt = duration / steps;
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
  for (int s = 0; s < steps; ++s) {
    const Eigen::MatrixXcd a1 = oracle::cplx(0, -1) * h((s + c1) * dt).cast<oracle::cplx>();
    const Eigen::MatrixXcd a2 = oracle::cplx(0, -1) * h((s + c2) * dt).cast<oracle::cplx>();
    const Eigen::MatrixXcd omega =
        0.5 * dt * (a1 + a2) + std::sqrt(3.0) / 12.0 * dt * dt * (a2 * a1 - a1 * a2);
    psi = omega.exp() * psi;
  }
  return psi;
}

double full_space_fidelity(int n, const AdiabaticPath& path, double duration, int steps) {
  const LaserPoint end = path.at(1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      oracle::full_plaquette_hamiltonian(n, end.rabi, end.detuning, kV));
  const Eigen::VectorXcd psi = full_space_state(n, path, duration, steps);
  // at Omega = 0 the ground level is degenerate; weight on the whole level
  double f = 0.0;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    if (es.eigenvalues()[k] > es.eigenvalues()[0] + 1e-9) break;
    f += std::norm(es.eigenvectors().col(k).cast<oracle::cplx>().dot(psi));
  }
  return f;
}

AdiabaticPath crossing_path() {
  AdiabaticPath p = spline_path({0.0, -kV}, {0.0, kV / 3}, {{kV / 2, -kV / 3}});
  p.tracked = dark_tracked_indices(p.start(), kConfig);
  return p;
}

}  // namespace

TEST(Ramps, StraightSplineIsLinear) {
  const AdiabaticPath p = spline_path({0.0, -1.0}, {1.0, 0.0});
  for (double s : {0.0, 0.1, 0.37, 0.5, 0.99, 1.0}) {
    EXPECT_NEAR(p.at(s).rabi, s, 1e-12);
    EXPECT_NEAR(p.at(s).detuning, -1.0 + s, 1e-12);
  }
}

TEST(Ramps, CollinearMidpointKeepsLine) {
  const AdiabaticPath a = spline_path({0.0, -1.0}, {1.0, 0.0});
  const AdiabaticPath b = spline_path({0.0, -1.0}, {1.0, 0.0}, {{0.5, -0.5}});
  for (int i = 0; i <= 100; ++i) {
    const double s = i / 100.0;
    EXPECT_NEAR(a.at(s).rabi, b.at(s).rabi, 1e-12);
    EXPECT_NEAR(a.at(s).detuning, b.at(s).detuning, 1e-12);
  }
}

TEST(Ramps, SplineHitsInteriorWaypoint) {
  const AdiabaticPath p = spline_path({0.0, -1.0}, {1.0, 0.0}, {{0.9, -0.8}});
  EXPECT_NEAR(p.at(0.5).rabi, 0.9, 1e-14);
  EXPECT_NEAR(p.at(0.5).detuning, -0.8, 1e-14);
}

TEST(Ramps, LinearRampSegment) {
  const RampSegment r = linear_ramp({0.0, -4.0}, {2.0, 6.0}, 3.0);
  EXPECT_EQ(segment_at(r, 0.0), (LaserPoint{0.0, -4.0}));
  EXPECT_EQ(segment_at(r, 3.0), (LaserPoint{2.0, 6.0}));
  EXPECT_NEAR(segment_at(r, 1.5).rabi, 1.0, 1e-14);
  EXPECT_NEAR(segment_at(r, 1.5).detuning, 1.0, 1e-14);
  const RampSegment c = linear_ramp({1.0, 2.0}, {1.0, 2.0}, 1.0);
  EXPECT_EQ(segment_at(c, 0.3), (LaserPoint{1.0, 2.0}));
}

TEST(Ramps, DarkPathGapIsDetuning) {
  const AdiabaticPath p = spline_path({0.0, -2.0 * kV}, {0.0, -0.5 * kV});
  for (double u : {0.0, 0.3, 1.0}) {
    const GapAndNorms g = gap_and_norms(p, u, kConfig, {1});
    EXPECT_NEAR(g.gap, std::abs(p.shape(u).detuning), 1e-9);
  }
}

TEST(Ramps, ConstantPathHasNoDerivative) {
  const AdiabaticPath p = spline_path({kV / 2, -kV}, {kV / 2, -kV});
  const GapAndNorms g = gap_and_norms(p, 0.4, kConfig, {1, 2, 3, 4});
  EXPECT_EQ(g.d1_norm, 0.0);
  EXPECT_EQ(g.d2_norm, 0.0);
  EXPECT_DOUBLE_EQ(adiabatic_upper_bound(p, 1e-3, kConfig), 0.0);
}

TEST(Ramps, SectorTwoGapMatchesDenseDiagonalization) {
  const AdiabaticPath p = spline_path({kV / 2, -kV}, {kV / 2, 3.0 * kV});
  for (int i = 0; i <= 64; ++i) {
    const double u = i / 64.0;
    const auto e = oracle::symmetric_eigenvalues(2, kV / 2, p.shape(u).detuning, kV);
    EXPECT_NEAR(gap_and_norms(p, u, kConfig, {2}).gap, e[1] - e[0], 1e-9);
  }
}

TEST(Ramps, ScheduleMonotoneWithExactEnds) {
  for (bool literal : {false, true}) {
    const AdiabaticPath p = reparametrize(crossing_path(), 0.75, kConfig, {512, literal});
    ASSERT_TRUE(p.has_schedule());
    const auto& s = p.schedule_s();
    const auto& th = p.schedule_theta();
    ASSERT_GE(s.size(), 512u);
    EXPECT_EQ(s.front(), 0.0);
    EXPECT_EQ(s.back(), 1.0);
    EXPECT_EQ(th.front(), 0.0);
    EXPECT_EQ(th.back(), 1.0);
    for (std::size_t i = 1; i < s.size(); ++i) {
      EXPECT_GT(s[i], s[i - 1]);
      EXPECT_GT(th[i], th[i - 1]);
    }
    EXPECT_EQ(p.theta(0.0), 0.0);
    EXPECT_EQ(p.theta(1.0), 1.0);
  }
}

TEST(Ramps, VanishingExponentGivesUniformSpeed) {
  const AdiabaticPath p = reparametrize(crossing_path(), 1e-9, kConfig);
  for (double s : {0.1, 0.5, 0.8}) EXPECT_NEAR(p.theta(s), s, 1e-6);
  const AdiabaticPath z = reparametrize(crossing_path(), 0.0, kConfig);
  for (double s : {0.1, 0.5, 0.8}) EXPECT_NEAR(z.theta(s), s, 1e-15);
}

TEST(Ramps, SlowdownSitsAtTheGap) {
  const AdiabaticPath base = crossing_path();
  const AdiabaticPath p = reparametrize(base, 0.75, kConfig);
  const auto& s = p.schedule_s();
  const auto& th = p.schedule_theta();
  std::size_t slow = 1;
  double min_rate = 1e300;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double rate = (th[i] - th[i - 1]) / (s[i] - s[i - 1]);
    if (rate < min_rate) {
      min_rate = rate;
      slow = i;
    }
  }
  const double u_slow = 0.5 * (th[slow] + th[slow - 1]);
  double best = 1e300, u_best = 0.0;
  for (int i = 1; i < 4096; ++i) {
    const double u = i / 4096.0;
    const GapAndNorms g = gap_and_norms(base, u, kConfig, base.sectors);
    const double h = g.gap * g.gap / g.d1_norm;
    if (h < best) {
      best = h;
      u_best = u;
    }
  }
  EXPECT_LE(std::abs(u_slow - u_best), 2.0 * (th[slow] - th[slow - 1]) + 1.0 / 4096);
}

TEST(Ramps, FidelityLimits) {
  const AdiabaticPath p = reparametrize(crossing_path(), 0.75, kConfig);
  const auto f1 = ramp_fidelity(p, 0.2, kConfig);
  const auto f2 = ramp_fidelity(p, 0.4, kConfig);
  const auto f4 = ramp_fidelity(p, 0.8, kConfig);
  for (std::size_t i = 0; i < f1.size(); ++i) {
    EXPECT_GE(f4[i], 0.99);
    EXPECT_GE(f4[i], f1[i] - 1e-3);
    EXPECT_GE(f2[i], 0.0);
    EXPECT_LE(f2[i], 1.0 + 1e-9);
  }
  // Sudden limit: overlap of |k = 0> with the final tracked eigenvector.
  const AdiabaticPath lit = spline_path({0.0, -kV}, {kV, -kV / 2});
  const auto fs = ramp_fidelity(lit, 1e-7, kConfig);
  for (std::size_t i = 0; i < lit.sectors.size(); ++i) {
    const int n = lit.sectors[i];
    const SectorSpectrum sp = sector_spectrum(n, lit.end(), kConfig);
    const double want = sp.vectors(0, lit.tracked[n]) * sp.vectors(0, lit.tracked[n]);
    EXPECT_NEAR(fs[i], want, 1e-6) << n;
  }
}

TEST(Ramps, SectorFourFidelityMatchesFullSpace) {
  AdiabaticPath p = spline_path({0.0, -3.0 * kV}, {kV, -0.5 * kV});
  p.sectors = {4};
  const double t = 0.02;
  const double want = full_space_fidelity(4, p, t, 4000);
  EXPECT_NEAR(ramp_fidelity(p, t, kConfig, {0.005, false})[0], want, 1e-8);
}

TEST(Ramps, SymmetricFidelityMatchesFullSpaceForSmallSectors) {
  AdiabaticPath p = reparametrize(crossing_path(), 0.75, kConfig);
  p.sectors = {1, 2, 3};
  const double t = 0.03;
  const auto f = ramp_fidelity(p, t, kConfig, {0.001, false});
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(f[i], full_space_fidelity(i + 1, p, t, 6000), 1e-8) << i + 1;
}

TEST(Ramps, TimeFunctionalDegenerateFlag) {
  const AdiabaticPath dark = spline_path({0.0, -kV}, {0.0, -2.0 * kV});
  const TimeFunctional t = time_functional(dark, 0.49, kConfig);
  EXPECT_TRUE(t.degenerate);
  EXPECT_DOUBLE_EQ(t.duration, ScanOptions{}.initial);
  EXPECT_THROW(time_functional(dark, 0.5, kConfig), InputError);
}

TEST(Ramps, TimeFunctionalMonotoneInEpsilon) {
  const AdiabaticPath p = reparametrize(crossing_path(), 0.75, kConfig);
  const double t3 = time_functional(p, 1e-3, kConfig).duration;
  const double t2 = time_functional(p, 2e-3, kConfig).duration;
  EXPECT_LE(t2, t3 * (1.0 + 1e-2));
  // The returned duration passes, and slowing down does not hurt materially.
  for (double f : ramp_fidelity(p, 2.0 * t3, kConfig)) EXPECT_GE(f, 1.0 - 1e-3);
  const auto f2 = ramp_fidelity(p, 2.0 * t3, kConfig);
  const auto f4 = ramp_fidelity(p, 4.0 * t3, kConfig);
  for (std::size_t i = 0; i < f2.size(); ++i) EXPECT_GE(f4[i], f2[i] - 0.05);
}

TEST(Ramps, ScanCapRaisesInfeasible) {
  const AdiabaticPath p = reparametrize(crossing_path(), 0.75, kConfig);
  ScanOptions scan;
  scan.cap = 1e-3;
  scan.initial = 1e-4;
  EXPECT_THROW(time_functional(p, 1e-3, kConfig, scan), InfeasibleError);
}

TEST(Ramps, BoundScalesInverselyWithEpsilon) {
  const AdiabaticPath p = reparametrize(crossing_path(), 0.75, kConfig);
  const double b1 = adiabatic_upper_bound(p, 1e-3, kConfig);
  const double b2 = adiabatic_upper_bound(p, 5e-4, kConfig);
  EXPECT_GT(b1, 0.0);
  EXPECT_NEAR(b2, 2.0 * b1, 1e-9 * b2);
}

TEST(Ramps, BoundQuadratureConverges) {
  const AdiabaticPath p = spline_path({0.0, -kV}, {kV / 2, -kV / 3}, {{kV / 3, -0.8 * kV}});
  const double coarse = adiabatic_upper_bound(p, 1e-3, kConfig, 2048);
  const double fine = adiabatic_upper_bound(p, 1e-3, kConfig, 4096);
  EXPECT_NEAR(coarse, fine, 1e-6 * fine);
}

TEST(Ramps, ReportFields) {
  const AdiabaticPath p = reparametrize(crossing_path(), 0.75, kConfig);
  const RampReport r = ramp_report(p, 1e-3, kConfig);
  EXPECT_EQ(r.sectors, p.sectors);
  ASSERT_EQ(r.fidelity.size(), r.sectors.size());
  ASSERT_EQ(r.min_gap.size(), r.sectors.size());
  for (double f : r.fidelity) {
    EXPECT_GE(f, 1.0 - 1e-3);
    EXPECT_LE(f, 1.0 + 1e-9);
  }
  for (double g : r.min_gap) EXPECT_GT(g, 0.0);
  EXPECT_GT(r.duration, 0.0);
  EXPECT_GE(r.bound, 0.0);
}

TEST(Ramps, OptimizerBudgetOneIsInitialGuess) {
  RampProblem prob;
  prob.start = {0.0, -kV};
  prob.end = {kV / 2, -kV / 3};
  prob.bounds = {kV, -3.0 * kV, kV, 0.0, 1.0};
  RampOptions opt;
  opt.budget = 1;
  const OptimizedRamp r = optimize_ramp(prob, kConfig, opt);
  AdiabaticPath guess = spline_path(prob.start, prob.end);
  guess.tracked = dark_tracked_indices(prob.start, kConfig);
  guess = reparametrize(guess, opt.initial_q, kConfig);
  EXPECT_NEAR(r.report.duration, time_functional(guess, prob.epsilon, kConfig).duration, 1e-12);
  EXPECT_DOUBLE_EQ(r.path.exponent(), opt.initial_q);
}

TEST(Ramps, OptimizerDeterministicAndBeatsLinear) {
  RampProblem prob;
  prob.start = {0.0, -kV};
  prob.end = {kV / 2, -kV / 3};
  prob.bounds = {kV, -3.0 * kV, kV, 0.0, 1.0};
  RampOptions opt;
  opt.budget = 4;
  opt.local_evaluations = 10;
  opt.seed = 7;
  const OptimizedRamp a = optimize_ramp(prob, kConfig, opt);
  const OptimizedRamp b = optimize_ramp(prob, kConfig, opt);
  EXPECT_EQ(a.report.duration, b.report.duration);
  EXPECT_EQ(a.path, b.path);
  const OptimizedRamp lin = linear_reference(prob, kConfig);
  EXPECT_LE(a.report.duration, lin.report.duration);
}
