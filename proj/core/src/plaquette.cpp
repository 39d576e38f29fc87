#include "rydpar/plaquette.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rydpar/errors.hpp"

namespace rydpar {

namespace {

void check_sector(int n) {
  if (n < 0 || n > PlaquetteConfig::size)
    throw InputError("sector index " + std::to_string(n) + " outside 0..4");
}

// -iH applied to one column of the tridiagonal sector Hamiltonian.
struct SectorOps {
  int n = 0;
  double v = 0.0;
  std::array<double, 5> hop{};   // sqrt((n-k)(k+1))
  std::array<double, 5> pairs{};  // k(k-1)/2
  bool centered = false;

  SectorOps(int n_, double v_, bool centered_ = false) : n(n_), v(v_), centered(centered_) {
    for (int k = 0; k <= n; ++k) {
      hop[k] = k < n ? std::sqrt(static_cast<double>((n - k) * (k + 1))) : 0.0;
      pairs[k] = 0.5 * k * (k - 1);
    }
  }

  double shift(LaserPoint p) const {
    if (!centered) return 0.0;
    double lo = 0.0, hi = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double d = -k * p.detuning + pairs[k] * v;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return 0.5 * (lo + hi);
  }

  void apply(LaserPoint p, const cplx* in, cplx* out) const {
    const double half = 0.5 * p.rabi;
    const double c = shift(p);
    for (int k = 0; k <= n; ++k) {
      cplx h = (-k * p.detuning + pairs[k] * v - c) * in[k];
      if (k > 0) h += half * hop[k - 1] * in[k - 1];
      if (k < n) h += half * hop[k] * in[k + 1];
      out[k] = cplx(h.imag(), -h.real());
    }
  }
};

void rk4_column(const SectorOps& ops, const PulseSegment& seg, std::int64_t steps, cplx* psi) {
  const double d = segment_duration(seg);
  if (steps <= 0 || d <= 0.0) return;
  const double h = d / static_cast<double>(steps);
  const int dim = ops.n + 1;
  std::array<cplx, 5> k1, k2, k3, k4, tmp;
  const bool hold = std::holds_alternative<HoldSegment>(seg);
  LaserPoint p0 = segment_at(seg, 0.0);
  for (std::int64_t s = 0; s < steps; ++s) {
    const double t = s * h;
    const LaserPoint pm = hold ? p0 : segment_at(seg, t + 0.5 * h);
    const LaserPoint p1 = hold ? p0 : segment_at(seg, (s + 1) * h);
    ops.apply(p0, psi, k1.data());
    for (int k = 0; k < dim; ++k) tmp[k] = psi[k] + 0.5 * h * k1[k];
    ops.apply(pm, tmp.data(), k2.data());
    for (int k = 0; k < dim; ++k) tmp[k] = psi[k] + 0.5 * h * k2[k];
    ops.apply(pm, tmp.data(), k3.data());
    for (int k = 0; k < dim; ++k) tmp[k] = psi[k] + h * k3[k];
    ops.apply(p1, tmp.data(), k4.data());
    for (int k = 0; k < dim; ++k) psi[k] += (h / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    p0 = p1;
  }
}

std::int64_t segment_steps(const PulseSegment& seg, int n, PlaquetteConfig config,
                           const IntegratorOptions& opt) {
  const double d = segment_duration(seg);
  if (d <= 0.0) return 0;
  const double bound = segment_norm_bound(seg, n, config, opt.center_spectrum);
  auto steps = static_cast<std::int64_t>(std::ceil(d * bound / opt.step_bound));
  if (opt.max_step > 0.0)
    steps = std::max(steps, static_cast<std::int64_t>(std::ceil(d / opt.max_step)));
  return std::max<std::int64_t>(steps, bound > 0.0 ? 1 : 0);
}

// Evolves the columns of psi through the pulse with `mult` times the base steps.
std::int64_t propagate(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                       bool centered, const std::vector<std::int64_t>& base,
                       std::int64_t mult, Eigen::MatrixXcd& psi) {
  const SectorOps ops(n, config.interaction, centered);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < pulse.segments().size(); ++i) {
    const std::int64_t steps = base[i] * mult;
    for (Eigen::Index c = 0; c < psi.cols(); ++c)
      rk4_column(ops, pulse.segments()[i], steps, psi.col(c).data());
    total += steps;
  }
  return total;
}

Eigen::MatrixXcd integrate(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                           const Eigen::MatrixXcd& psi0, const IntegratorOptions& opt,
                           IntegrationReport* report, bool full_propagator) {
  check_sector(n);
  if (!(opt.tolerance > 0.0)) throw InputError("integrator tolerance must be positive");
  std::vector<std::int64_t> base;
  for (const auto& seg : pulse.segments()) base.push_back(segment_steps(seg, n, config, opt));

  auto defect = [&](const Eigen::MatrixXcd& m) {
    if (full_propagator)
      return (m.adjoint() * m - Eigen::MatrixXcd::Identity(m.cols(), m.cols()))
          .cwiseAbs()
          .maxCoeff();
    return std::abs(m.squaredNorm() - psi0.squaredNorm());
  };

  Eigen::MatrixXcd coarse = psi0;
  std::int64_t mult = 1;
  std::int64_t steps = propagate(pulse, n, config, opt.center_spectrum, base, mult, coarse);
  IntegrationReport rep;
  rep.step_bound = opt.step_bound;
  if (!opt.richardson) {
    rep.steps = steps;
    rep.unitarity_error = defect(coarse);
    if (report) *report = rep;
    return coarse;
  }
  for (int r = 0; r <= opt.max_refinements; ++r) {
    Eigen::MatrixXcd fine = psi0;
    steps = propagate(pulse, n, config, opt.center_spectrum, base, 2 * mult, fine);
    rep.richardson_error = psi0.size() ? (fine - coarse).cwiseAbs().maxCoeff() : 0.0;
    rep.unitarity_error = defect(fine);
    rep.steps = steps;
    rep.refinements = r;
    rep.step_bound = opt.step_bound / static_cast<double>(2 * mult);
    if (rep.richardson_error <= opt.tolerance && rep.unitarity_error <= opt.tolerance) {
      if (report) *report = rep;
      return fine;
    }
    coarse = std::move(fine);
    mult *= 2;
  }
  throw NumericalError("step-size underflow in sector " + std::to_string(n) +
                       " evolution: Richardson error " + std::to_string(rep.richardson_error) +
                       " after " + std::to_string(opt.max_refinements) + " halvings");
}

// Continuity-following eigenvector selection.
struct Follower {
  Eigen::VectorXd vec;
  int index = 0;
  double min_overlap = 1.0;

  // Returns overlap^2 with the previous vector; flips sign for continuity.
  double step(const SectorSpectrum& sp) {
    Eigen::VectorXd ov = sp.vectors.transpose() * vec;
    Eigen::Index best = 0;
    ov.cwiseAbs().maxCoeff(&best);
    const double o2 = ov[best] * ov[best];
    index = static_cast<int>(best);
    vec = sp.vectors.col(best) * (ov[best] < 0.0 ? -1.0 : 1.0);
    min_overlap = std::min(min_overlap, o2);
    return o2;
  }
};

constexpr std::array<double, 4> kGaussNodes{0.0694318442029737, 0.3300094782075719,
                                            0.6699905217924281, 0.9305681557970263};
constexpr std::array<double, 4> kGaussWeights{0.1739274225687269, 0.3260725774312731,
                                              0.3260725774312731, 0.1739274225687269};

}  // namespace

Eigen::MatrixXd sector_drive_generator(int n) {
  check_sector(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 0; k < n; ++k) {
    const double c = 0.5 * std::sqrt(static_cast<double>((n - k) * (k + 1)));
    h(k + 1, k) = c;
    h(k, k + 1) = c;
  }
  return h;
}

Eigen::MatrixXd sector_detuning_generator(int n) {
  check_sector(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) h(k, k) = -k;
  return h;
}

Eigen::MatrixXd sector_hamiltonian(int n, LaserPoint point, PlaquetteConfig config) {
  check_sector(n);
  if (point.rabi < 0.0) throw InputError("Rabi frequency must be nonnegative");
  Eigen::MatrixXd h = point.rabi * sector_drive_generator(n);
  for (int k = 0; k <= n; ++k) h(k, k) = -k * point.detuning + 0.5 * k * (k - 1) * config.interaction;
  return h;
}

SectorSpectrum sector_spectrum(int n, LaserPoint point, PlaquetteConfig config) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sector_hamiltonian(n, point, config));
  return {es.eigenvalues(), es.eigenvectors()};
}

double spectral_norm(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double segment_norm_bound(const PulseSegment& seg, int n, PlaquetteConfig config,
                          bool centered) {
  const SectorOps ops(n, config.interaction, centered);
  auto norm_at = [&](LaserPoint p) {
    Eigen::MatrixXd h = sector_hamiltonian(n, p, config);
    h.diagonal().array() -= ops.shift(p);
    return spectral_norm(h);
  };
  if (const auto* hold = std::get_if<HoldSegment>(&seg)) return norm_at(hold->point);
  const auto& path = std::get<RampSegment>(seg).path;
  double b = 0.0;
  constexpr int kSamples = 64;
  for (int i = 0; i <= kSamples; ++i) b = std::max(b, norm_at(path.at(double(i) / kSamples)));
  return b;
}

int ground_connected_index(int n, LaserPoint point, PlaquetteConfig config) {
  const SectorSpectrum sp = sector_spectrum(n, point, config);
  Eigen::Index best = 0;
  sp.vectors.row(0).cwiseAbs().maxCoeff(&best);
  const double scale = 1.0 + std::abs(point.detuning) + std::abs(config.interaction) + point.rabi;
  for (int j = 0; j <= n; ++j)
    if (j != best && std::abs(sp.energies[j] - sp.energies[best]) < 1e-9 * scale)
      throw InputError("degenerate start: k=0 level of sector " + std::to_string(n) +
                       " is degenerate at the initial detuning");
  return static_cast<int>(best);
}

EigenTrack track_eigenstate(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                            int samples) {
  check_sector(n);
  if (samples < 2) throw InputError("tracking needs at least 2 samples per ramp");
  if (pulse.start().rabi != 0.0) throw InputError("tracking requires a pulse starting at zero Rabi frequency");

  for (int density = samples;; density *= 2) {
    EigenTrack track;
    Follower f;
    track.initial_index = ground_connected_index(n, pulse.start(), config);
    SectorSpectrum sp = sector_spectrum(n, pulse.start(), config);
    f.index = track.initial_index;
    f.vec = sp.vectors.col(f.index);
    auto record = [&](double t, const SectorSpectrum& s) {
      track.points.push_back({t, f.index, s.energies[f.index], f.vec[0] * f.vec[0]});
    };
    record(0.0, sp);
    double t0 = 0.0;
    bool refine = false;
    for (const auto& seg : pulse.segments()) {
      const double d = segment_duration(seg);
      const int m = std::holds_alternative<RampSegment>(seg) ? density : 1;
      for (int i = 1; i <= m; ++i) {
        const double tau = d * i / m;
        sp = sector_spectrum(n, segment_at(seg, tau), config);
        const double o2 = f.step(sp);
        if (o2 < 0.5 && density >= 64 * samples)
          throw NumericalError("eigenstate tracking ambiguous in sector " + std::to_string(n) +
                               " at t = " + std::to_string(t0 + tau));
        refine |= o2 < 0.9;
        record(t0 + tau, sp);
      }
      t0 += d;
    }
    track.min_overlap = f.min_overlap;
    if (!refine || density >= 64 * samples) {
      if (f.min_overlap < 0.5)
        throw NumericalError("eigenstate tracking ambiguous in sector " + std::to_string(n));
      return track;
    }
  }
}

double SectorPhases::total() const {
  double s = 0.0;
  for (double p : phase) s += p;
  return s;
}

SectorPhases tracked_phases(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                            int refinement) {
  check_sector(n);
  if (refinement < 1) throw InputError("refinement must be at least 1");
  if (pulse.start().rabi != 0.0) throw InputError("tracking requires a pulse starting at zero Rabi frequency");

  for (int sub = refinement;; sub *= 2) {
    SectorPhases out;
    Follower f;
    out.initial_index = ground_connected_index(n, pulse.start(), config);
    SectorSpectrum sp = sector_spectrum(n, pulse.start(), config);
    f.index = out.initial_index;
    f.vec = sp.vectors.col(f.index);
    out.start_k0 = f.vec[0];
    bool refine = false;
    for (const auto& seg : pulse.segments()) {
      const double d = segment_duration(seg);
      if (const auto* hold = std::get_if<HoldSegment>(&seg)) {
        sp = sector_spectrum(n, hold->point, config);
        refine |= f.step(sp) < 0.9;
        out.phase.push_back(-sp.energies[f.index] * d);
        out.index.push_back(f.index);
        continue;
      }
      const auto& path = std::get<RampSegment>(seg).path;
      std::vector<double> breaks;
      if (path.has_schedule()) {
        breaks = path.schedule_s();
      } else {
        constexpr int kIntervals = 512;
        for (int j = 0; j <= kIntervals; ++j) breaks.push_back(double(j) / kIntervals);
      }
      double integral = 0.0;
      for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
        const double w = (breaks[j + 1] - breaks[j]) / sub;
        for (int r = 0; r < sub; ++r) {
          const double a = breaks[j] + r * w;
          for (int g = 0; g < 4; ++g) {
            sp = sector_spectrum(n, path.at(a + kGaussNodes[g] * w), config);
            refine |= f.step(sp) < 0.9;
            integral += kGaussWeights[g] * w * sp.energies[f.index];
          }
        }
      }
      sp = sector_spectrum(n, path.at(1.0), config);
      refine |= f.step(sp) < 0.9;
      out.phase.push_back(-integral * d);
      out.index.push_back(f.index);
    }
    out.end_k0 = f.vec[0];
    if (!refine || sub >= 16 * refinement) {
      if (f.min_overlap < 0.5)
        throw NumericalError("eigenstate tracking ambiguous in sector " + std::to_string(n));
      return out;
    }
  }
}

SectorPropagator evolve_sector(const PiecewisePulse& pulse, int n, PlaquetteConfig config,
                               const IntegratorOptions& options) {
  check_sector(n);
  SectorPropagator out;
  out.matrix = integrate(pulse, n, config, Eigen::MatrixXcd::Identity(n + 1, n + 1), options,
                         &out.report, true);
  return out;
}

Eigen::VectorXcd evolve_sector_state(const PiecewisePulse& pulse, int n,
                                     PlaquetteConfig config, const Eigen::VectorXcd& psi0,
                                     const IntegratorOptions& options,
                                     IntegrationReport* report) {
  check_sector(n);
  if (psi0.size() != n + 1) throw InputError("state dimension does not match sector");
  return integrate(pulse, n, config, psi0, options, report, false);
}

GateAmplitudes coherent_gate_channel(const PiecewisePulse& pulse_down,
                                     const PiecewisePulse& pulse_up, PlaquetteConfig config,
                                     const IntegratorOptions& options) {
  pulse_down.require_dark_ends();
  pulse_up.require_dark_ends();
  std::array<cplx, 5> down{}, up{};
  const bool same = pulse_down == pulse_up;
  for (int n = 0; n <= 4; ++n) {
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(n + 1);
    e0[0] = 1.0;
    down[n] = evolve_sector_state(pulse_down, n, config, e0, options)[0];
    up[n] = same ? down[n] : evolve_sector_state(pulse_up, n, config, e0, options)[0];
  }
  GateAmplitudes a{};
  for (int z = 0; z < 16; ++z) {
    const int n = std::popcount(static_cast<unsigned>(z));
    a[z] = down[n] * up[4 - n];
  }
  return a;
}

GateTarget GateTarget::from_gamma(double gamma) { return {-gamma, -gamma, gamma}; }

GateTarget GateTarget::from_phase_differences(double dphi_a, double dphi_b) {
  return {dphi_a, dphi_b, 0.0};
}

cplx GateTarget::amplitude(int z) const {
  const int n = std::popcount(static_cast<unsigned>(z));
  const double phase = (n % 2) ? odd : (n == 2 ? class_b : class_a);
  return std::polar(1.0, phase);
}

double coherent_average_fidelity(const GateAmplitudes& amplitudes, const GateTarget& target) {
  cplx tr = 0.0;
  for (int z = 0; z < 16; ++z) tr += std::conj(target.amplitude(z)) * amplitudes[z];
  return (16.0 + std::norm(tr)) / (16.0 * 17.0);
}

double coherent_average_fidelity(const GateAmplitudes& amplitudes, double gamma) {
  return coherent_average_fidelity(amplitudes, GateTarget::from_gamma(gamma));
}

}  // namespace rydpar
