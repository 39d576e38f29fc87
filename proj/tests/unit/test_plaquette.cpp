#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rydpar/errors.hpp"
#include "rydpar/plaquette.hpp"

using namespace rydpar;

namespace {

constexpr double kV = 251.327;

std::vector<double> eigenvalues(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

PiecewisePulse hold(LaserPoint p, double t) { return PiecewisePulse({HoldSegment{p, t}}); }

// Dark start, linear ramps into a pause and back out.
PiecewisePulse slow_pulse(double ramp_time, LaserPoint pause, double pause_time) {
  const LaserPoint dark{0.0, -kV};
  return PiecewisePulse({linear_ramp(dark, pause, ramp_time), HoldSegment{pause, pause_time},
                         linear_ramp(pause, dark, ramp_time)});
}

}  // namespace

TEST(Plaquette, SectorMatrixEntries) {
  const LaserPoint p{3.0, 1.7};
  const PlaquetteConfig c{5.0};
  for (int n = 0; n <= 4; ++n) {
    const Eigen::MatrixXd h = sector_hamiltonian(n, p, c);
    ASSERT_EQ(h.rows(), n + 1);
    for (int k = 0; k <= n; ++k) {
      EXPECT_DOUBLE_EQ(h(k, k), -k * p.detuning + k * (k - 1) * c.interaction / 2.0);
      for (int l = 0; l <= n; ++l) {
        if (l == k + 1)
          EXPECT_NEAR(h(l, k), p.rabi / 2.0 * std::sqrt((n - k) * (k + 1.0)), 1e-14);
        else if (l != k && l != k - 1)
          EXPECT_EQ(h(l, k), 0.0);
      }
    }
    EXPECT_TRUE(h.isApprox(h.transpose()));
  }
  EXPECT_THROW(sector_hamiltonian(5, p, c), InputError);
  EXPECT_THROW(sector_hamiltonian(-1, p, c), InputError);
}

TEST(Plaquette, DarkSpectraClosedForm) {
  const auto e1 = eigenvalues(sector_hamiltonian(1, {0.0, 2.5}, {kV}));
  EXPECT_NEAR(e1[0], -2.5, 1e-12);
  EXPECT_NEAR(e1[1], 0.0, 1e-12);
  const auto e4 = eigenvalues(sector_hamiltonian(4, {0.0, 0.0}, {kV}));
  const std::vector<double> want{0.0, 0.0, kV, 3 * kV, 6 * kV};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(e4[i], want[i], 1e-12 * 6 * kV);
  const SectorSpectrum s0 = sector_spectrum(0, {1.0, 1.0}, {kV});
  ASSERT_EQ(s0.energies.size(), 1);
  EXPECT_EQ(s0.energies[0], 0.0);
}

TEST(Plaquette, SymmetricSectorMatchesFullSpace) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int draw = 0; draw < 20; ++draw) {
    const double v = kV * (0.2 + std::abs(u(rng)));
    const LaserPoint p{v * std::abs(u(rng)), 2.0 * v * u(rng)};
    for (int n = 1; n <= 4; ++n) {
      const auto want = oracle::symmetric_eigenvalues(n, p.rabi, p.detuning, v);
      const SectorSpectrum s = sector_spectrum(n, p, {v});
      for (int i = 0; i <= n; ++i)
        EXPECT_LE(oracle::relative_gap(s.energies[i], want[i], std::abs(want[i])), 1e-10);
    }
  }
}

TEST(Plaquette, SpectrumVectorsOrthonormalAndAscending) {
  const SectorSpectrum s = sector_spectrum(4, {100.0, -30.0}, {kV});
  for (int i = 0; i + 1 < 5; ++i) EXPECT_LT(s.energies[i], s.energies[i + 1]);
  EXPECT_TRUE((s.vectors.transpose() * s.vectors).isIdentity(1e-12));
  const Eigen::MatrixXd h = sector_hamiltonian(4, {100.0, -30.0}, {kV});
  EXPECT_TRUE((h * s.vectors).isApprox(s.vectors * s.energies.asDiagonal(), 1e-12));
}

TEST(Plaquette, AnticrossingWidensWithSectorSize) {
  const double rabi = kV / 2.0;
  double previous = 0.0;
  for (int n = 1; n <= 4; ++n) {
    double gap = 1e300;
    for (int i = 0; i <= 4000; ++i) {
      const double d = kV * (-1.0 + 4.0 * i / 4000.0);
      const auto e = sector_spectrum(n, {rabi, d}, {kV}).energies;
      gap = std::min(gap, e[1] - e[0]);
    }
    EXPECT_GT(gap, 0.0);
    EXPECT_GT(gap, previous) << n;
    previous = gap;
  }
}

TEST(Plaquette, GroundConnectedIndex) {
  for (int n = 1; n <= 4; ++n) EXPECT_EQ(ground_connected_index(n, {0.0, -kV}, {kV}), 0);
  EXPECT_EQ(ground_connected_index(2, {0.0, 0.3 * kV}, {kV}), 1);
  // n = 1 at zero detuning: k = 0 and k = 1 coincide
  EXPECT_THROW(ground_connected_index(1, {0.0, 0.0}, {kV}), Error);
}

TEST(Plaquette, TrackingFromDarkStarts) {
  const PiecewisePulse p = slow_pulse(0.5, {kV / 2, -kV / 2}, 0.1);
  for (int n = 1; n <= 4; ++n) {
    const EigenTrack t = track_eigenstate(p, n, {kV});
    EXPECT_EQ(t.initial_index, 0);
    for (const auto& pt : t.points) EXPECT_EQ(pt.index, 0);
  }
  const PiecewisePulse excited({linear_ramp({0.0, 0.3 * kV}, {kV / 4, 0.3 * kV}, 0.5),
                                linear_ramp({kV / 4, 0.3 * kV}, {0.0, 0.3 * kV}, 0.5)});
  EXPECT_EQ(track_eigenstate(excited, 2, {kV}).initial_index, 1);
}

TEST(Plaquette, DarkConstantPulseHasZeroEnergy) {
  const PiecewisePulse p = hold({0.0, -40.0}, 0.3);
  for (int n = 0; n <= 4; ++n) {
    for (const auto& pt : track_eigenstate(p, n, {kV}).points) EXPECT_EQ(pt.energy, 0.0);
    EXPECT_NEAR(tracked_phases(p, n, {kV}).total(), 0.0, 1e-15);
  }
}

TEST(Plaquette, HoldPhaseIsEnergyTimesDuration) {
  const LaserPoint q{80.0, 30.0};
  const PiecewisePulse p({linear_ramp({0.0, -kV}, q, 0.4), HoldSegment{q, 0.25},
                          linear_ramp(q, {0.0, -kV}, 0.4)});
  for (int n = 1; n <= 4; ++n) {
    const SectorPhases sp = tracked_phases(p, n, {kV});
    const double e = sector_spectrum(n, q, {kV}).energies[0];
    EXPECT_NEAR(sp.phase[1], -e * 0.25, 1e-10);
  }
}

TEST(Plaquette, ZeroDurationIsIdentity) {
  const PiecewisePulse p = hold({10.0, 3.0}, 0.0);
  for (int n = 0; n <= 4; ++n)
    EXPECT_TRUE(evolve_sector(p, n, {kV}).matrix.isIdentity(1e-15));
  const GateAmplitudes a = coherent_gate_channel(hold({0, -1}, 0.0), hold({0, -1}, 0.0), {kV});
  for (const auto& x : a) EXPECT_EQ(x, cplx(1.0, 0.0));
}

TEST(Plaquette, DarkEvolutionIsDiagonalPhase) {
  const double d = 37.0, t = 0.21;
  IntegratorOptions tight;
  tight.tolerance = 1e-11;
  for (int n = 1; n <= 4; ++n) {
    const Eigen::MatrixXcd u = evolve_sector(hold({0.0, d}, t), n, {kV}, tight).matrix;
    for (int k = 0; k <= n; ++k) {
      const cplx want = std::exp(cplx(0.0, k * d * t - k * (k - 1) * kV * t / 2.0));
      EXPECT_LT(std::abs(u(k, k) - want), 1e-8);
    }
    EXPECT_LT((u - Eigen::MatrixXcd(u.diagonal().asDiagonal())).norm(), 1e-8);
  }
}

TEST(Plaquette, ResonantRabiCycle) {
  const double rabi = 50.0;
  IntegratorOptions tight;
  tight.tolerance = 1e-11;
  const Eigen::MatrixXcd u =
      evolve_sector(hold({rabi, 0.0}, kTwoPi / rabi), 1, {kV}, tight).matrix;
  EXPECT_LT(std::abs(u(0, 0) + 1.0), 1e-8);
  EXPECT_LT(std::abs(u(1, 0)), 1e-8);
}

TEST(Plaquette, PropagatorUnitaryAndMatchesFullSpace) {
  const PiecewisePulse p = slow_pulse(0.05, {180.0, 40.0}, 0.02);
  for (int n = 1; n <= 3; ++n) {
    const SectorPropagator sp = evolve_sector(p, n, {kV});
    const auto m = sp.matrix;
    EXPECT_LT((m.adjoint() * m - Eigen::MatrixXcd::Identity(n + 1, n + 1)).norm(), 1e-8);
    EXPECT_GT(sp.report.steps, 0);
    // Full-space amplitude of the all-ground state.
    const auto full = oracle::midpoint_propagator(
        [&](double t) {
          const LaserPoint q = p.at(t);
          return oracle::full_plaquette_hamiltonian(n, q.rabi, q.detuning, kV);
        },
        p.duration(), 40000, 1 << n);
    EXPECT_LT(std::abs(full(0, 0) - m(0, 0)), 1e-5) << n;
  }
}

TEST(Plaquette, TargetAmplitudesByClass) {
  const double g = 0.7;
  const GateTarget t = GateTarget::from_gamma(g);
  for (int z = 0; z < 16; ++z) {
    const int n = std::popcount(static_cast<unsigned>(z));
    // odd parity picks up +g, even parity -g
    const double want = (n % 2) ? g : -g;
    EXPECT_LT(std::abs(t.amplitude(z) - std::polar(1.0, want)), 1e-15);
  }
  const GateTarget d = GateTarget::from_phase_differences(0.3, -1.1);
  EXPECT_LT(std::abs(d.amplitude(0) - std::polar(1.0, 0.3)), 1e-15);
  EXPECT_LT(std::abs(d.amplitude(3) - std::polar(1.0, -1.1)), 1e-15);
  EXPECT_LT(std::abs(d.amplitude(7) - 1.0), 1e-15);
}

TEST(Plaquette, CoherentFidelityAnchors) {
  GateAmplitudes a{};
  for (int z = 0; z < 16; ++z) a[z] = GateTarget::from_gamma(1.3).amplitude(z);
  EXPECT_NEAR(coherent_average_fidelity(a, 1.3), 1.0, 1e-15);
  for (auto& x : a) x *= std::polar(1.0, 0.9);  // global phase
  EXPECT_NEAR(coherent_average_fidelity(a, 1.3), 1.0, 1e-15);
  a.fill(0.0);
  EXPECT_NEAR(coherent_average_fidelity(a, 1.3), 1.0 / 17.0, 1e-15);
  a.fill(1.0);
  EXPECT_NEAR(coherent_average_fidelity(a, 0.0), 1.0, 1e-15);
}

TEST(Plaquette, GateChannelSymmetries) {
  const PiecewisePulse p = slow_pulse(0.6, {kV / 2, -kV / 3}, 0.05);
  const GateAmplitudes a = coherent_gate_channel(p, p, {kV});
  auto flip = [](int z) { return z ^ 15; };
  for (int z = 0; z < 16; ++z) {
    EXPECT_LT(std::abs(a[z] - a[flip(z)]), 1e-12);
    EXPECT_LE(std::abs(a[z]), 1.0 + 1e-8);
  }
  // Phase classes {0,4}, {1,3}, {2}; within a class the amplitude is shared.
  auto cls = [](int z) {
    const int n = std::popcount(static_cast<unsigned>(z));
    return n % 2 ? 1 : (n == 2 ? 2 : 0);
  };
  for (int z = 0; z < 16; ++z)
    for (int w = 0; w < 16; ++w)
      if (cls(z) == cls(w))
        EXPECT_LT(std::abs(std::remainder(std::arg(a[z]) - std::arg(a[w]), kTwoPi)), 1e-6);
}

TEST(Plaquette, AdiabaticAmplitudesCarryDynamicalPhases) {
  const PiecewisePulse p = slow_pulse(3.0, {kV / 2, -kV / 3}, 0.05);
  const GateAmplitudes a = coherent_gate_channel(p, p, {kV});
  std::array<double, 5> phi{};
  for (int n = 0; n <= 4; ++n) phi[n] = tracked_phases(p, n, {kV}).total();
  for (int z = 0; z < 16; ++z) {
    const int down = std::popcount(static_cast<unsigned>(z));
    EXPECT_GT(std::abs(a[z]), 0.999);
    const double want = phi[down] + phi[4 - down];
    EXPECT_LT(std::abs(std::remainder(std::arg(a[z]) - want, kTwoPi)), 5e-3);
  }
}

TEST(Plaquette, DarkEndsRequired) {
  const PiecewisePulse lit = hold({10.0, -1.0}, 0.1);
  EXPECT_THROW(coherent_gate_channel(lit, lit, {kV}), InputError);
}
