#include "rydpar/open_system.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "rydpar/errors.hpp"

namespace rydpar {

void DecayModel::validate() const {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw InputError("decay rate must be nonnegative");
  if (to_down < 0.0 || to_up < 0.0 || to_dark < 0.0)
    throw InputError("branching ratios must be nonnegative");
  if (std::abs(to_down + to_up + to_dark - 1.0) > 1e-12)
    throw InputError("branching ratios must sum to 1");
}

namespace {

constexpr cplx kI{0.0, 1.0};

// Largest eigenvalue spread over sectors 0..atoms along one segment, plus the
// decay rate: bounds the generator of the vectorized master equation.
double generator_spread(const PulseSegment& seg, int atoms, PlaquetteConfig config,
                        double rate) {
  auto spread = [&](LaserPoint p) {
    double lo = 0.0, hi = 0.0;
    for (int n = 1; n <= atoms; ++n) {
      const auto e = sector_spectrum(n, p, config).energies;
      lo = std::min(lo, e.minCoeff());
      hi = std::max(hi, e.maxCoeff());
    }
    return hi - lo;
  };
  double s = 0.0;
  if (const auto* hold = std::get_if<HoldSegment>(&seg)) {
    s = spread(hold->point);
  } else {
    const double d = segment_duration(seg);
    constexpr int kSamples = 64;
    for (int j = 0; j <= kSamples; ++j) s = std::max(s, spread(segment_at(seg, d * j / kSamples)));
  }
  return s + rate;
}

std::int64_t lindblad_steps(const PulseSegment& seg, int atoms, PlaquetteConfig config,
                            double rate, const LindbladOptions& opt) {
  const double d = segment_duration(seg);
  if (d <= 0.0) return 0;
  if (!(opt.step_bound > 0.0)) throw InputError("step bound must be positive");
  const double bound = generator_spread(seg, atoms, config, rate);
  auto steps = static_cast<std::int64_t>(std::ceil(d * bound / opt.step_bound));
  if (opt.max_step > 0.0)
    steps = std::max(steps, static_cast<std::int64_t>(std::ceil(d / opt.max_step)));
  return std::max<std::int64_t>(steps, 1);
}

// Fixed-step RK4 over a pulse for any linear generator apply(point, in, out).
template <class State, class Apply>
void rk4_pulse(const PiecewisePulse& pulse, int atoms, PlaquetteConfig config, double rate,
               const LindbladOptions& opt, State& x, Apply&& apply) {
  State k1 = x, k2 = x, k3 = x, k4 = x, tmp = x;
  for (const auto& seg : pulse.segments()) {
    const std::int64_t steps = lindblad_steps(seg, atoms, config, rate, opt);
    if (steps == 0) continue;
    const double h = segment_duration(seg) / static_cast<double>(steps);
    LaserPoint p0 = segment_at(seg, 0.0);
    for (std::int64_t s = 0; s < steps; ++s) {
      const LaserPoint pm = segment_at(seg, (s + 0.5) * h);
      const LaserPoint p1 = segment_at(seg, (s + 1) * h);
      apply(p0, x, k1);
      tmp = x + (0.5 * h) * k1;
      apply(pm, tmp, k2);
      tmp = x + (0.5 * h) * k2;
      apply(pm, tmp, k3);
      tmp = x + h * k3;
      apply(p1, tmp, k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      p0 = p1;
    }
  }
}

int pow4(int n) { return 1 << (2 * n); }

int level_of(int index, int atom) { return (index >> (2 * atom)) & 3; }

int with_level(int index, int atom, int level) {
  return (index & ~(3 << (2 * atom))) | (level << (2 * atom));
}

// Full 4^N-level master equation.
struct FullLiouvillian {
  int atoms = 0;
  int dim = 0;
  int coupled = kDown;
  double v = 0.0;
  DecayModel decay;
  std::vector<int> rydberg, pairs;
  std::vector<std::vector<int>> hops;
  struct Jump {
    int i, j, ti, tj;
    double rate;
  };
  std::vector<Jump> jumps;

  FullLiouvillian(int atoms_, CoupledLevel c, PlaquetteConfig config, const DecayModel& d)
      : atoms(atoms_), dim(pow4(atoms_)), coupled(c == CoupledLevel::down ? kDown : kUp),
        v(config.interaction), decay(d), rydberg(dim), pairs(dim), hops(dim) {
    for (int i = 0; i < dim; ++i) {
      int r = 0;
      for (int k = 0; k < atoms; ++k) {
        const int l = level_of(i, k);
        if (l == kRydberg) ++r;
        if (l == kRydberg) hops[i].push_back(with_level(i, k, coupled));
        if (l == coupled) hops[i].push_back(with_level(i, k, kRydberg));
      }
      rydberg[i] = r;
      pairs[i] = r * (r - 1) / 2;
    }
    const std::array<double, 4> branch{d.to_down * d.rate, d.to_up * d.rate, 0.0,
                                       d.to_dark * d.rate};
    if (d.rate > 0.0)
      for (int j = 0; j < dim; ++j) {
        if (!rydberg[j]) continue;
        for (int i = 0; i < dim; ++i) {
          if (!rydberg[i]) continue;
          for (int k = 0; k < atoms; ++k) {
            if (level_of(i, k) != kRydberg || level_of(j, k) != kRydberg) continue;
            for (int l : {kDown, kUp, kDark})
              if (branch[l] > 0.0)
                jumps.push_back({i, j, with_level(i, k, l), with_level(j, k, l), branch[l]});
          }
        }
      }
  }

  void apply(LaserPoint p, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
    const cplx half = -kI * (0.5 * p.rabi);
    const double g2 = 0.5 * decay.rate;
    for (int j = 0; j < dim; ++j) {
      const double ej = -p.detuning * rydberg[j] + v * pairs[j];
      for (int i = 0; i < dim; ++i) {
        const double ei = -p.detuning * rydberg[i] + v * pairs[i];
        cplx acc = cplx(g2 * -(rydberg[i] + rydberg[j]), -(ei - ej)) * rho(i, j);
        cplx hop = 0.0;
        for (int a : hops[i]) hop += rho(a, j);
        for (int b : hops[j]) hop -= rho(i, b);
        out(i, j) = acc + half * hop;
      }
    }
    for (const auto& jp : jumps) out(jp.ti, jp.tj) += jp.rate * rho(jp.i, jp.j);
  }
};

int atoms_for_dimension(Eigen::Index dim) {
  for (int n = 1; n <= 4; ++n)
    if (dim == pow4(n)) return n;
  throw InputError("density matrix dimension must be 4^N with N = 1..4");
}

// Qubit basis z (bit k set <=> atom k down) to the full-space index.
int embed(int z) {
  int idx = 0;
  for (int k = 0; k < 4; ++k) idx = with_level(idx, k, (z >> k) & 1 ? kDown : kUp);
  return idx;
}

Eigen::MatrixXcd project_qubits(const Eigen::MatrixXcd& rho) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(16, 16);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) out(a, b) = rho(embed(a), embed(b));
  return out;
}

Eigen::MatrixXcd lift_qubits(const Eigen::MatrixXcd& rho) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(256, 256);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) out(embed(a), embed(b)) = rho(a, b);
  return out;
}

// Permutation-symmetric reduction. A basis operator |x><y| splits the atoms
// into groups by (ket coupled?, bra coupled?); the dynamics stays symmetric
// within each group. Group A (both coupled) carries per-atom states
// {cc, cr, rc, rr, oo}, where oo is an atom that decayed into the uncoupled
// qubit level; groups B1 (ket coupled) and B2 (bra coupled) are Dicke ladders;
// the remaining atoms are frozen. Coefficients refer to unnormalized
// symmetric sums, and dark-state population is dropped since it never returns.
struct OrbitSystem {
  enum : int { cc = 0, cr = 1, rc = 2, rr = 3, oo = 4 };
  enum Kind : int { ket_flip, bra_flip, jump_coupled, jump_other };

  struct Orbit {
    int a, b1, b2, c0;
    int offset;
    std::vector<std::array<int, 5>> a_states;
    std::map<std::array<int, 5>, int> a_index;
    int size() const { return static_cast<int>(a_states.size()) * (b1 + 1) * (b2 + 1); }
    int state(int ai, int j1, int j2) const { return offset + (ai * (b1 + 1) + j1) * (b2 + 1) + j2; }
  };
  struct Term {
    int target, source;
    Kind kind;
    double factor;
  };

  std::vector<Orbit> orbits;
  std::map<std::array<int, 4>, int> orbit_index;
  std::vector<double> d_rydberg, d_pairs, s_rydberg;
  std::vector<Term> terms;
  int dim = 0;

  OrbitSystem() {
    for (int a = 0; a <= 4; ++a)
      for (int b1 = 0; a + b1 <= 4; ++b1)
        for (int b2 = 0; a + b1 + b2 <= 4; ++b2) add_orbit(a, b1, b2, 4 - a - b1 - b2);
  }

  void add_orbit(int a, int b1, int b2, int c0) {
    Orbit o{a, b1, b2, c0, dim, {}, {}};
    for (int n0 = 0; n0 <= a; ++n0)
      for (int n1 = 0; n0 + n1 <= a; ++n1)
        for (int n2 = 0; n0 + n1 + n2 <= a; ++n2)
          for (int n3 = 0; n0 + n1 + n2 + n3 <= a; ++n3) {
            const std::array<int, 5> s{n0, n1, n2, n3, a - n0 - n1 - n2 - n3};
            o.a_index[s] = static_cast<int>(o.a_states.size());
            o.a_states.push_back(s);
          }
    dim += o.size();
    for (std::size_t ai = 0; ai < o.a_states.size(); ++ai)
      for (int j1 = 0; j1 <= b1; ++j1)
        for (int j2 = 0; j2 <= b2; ++j2) {
          const auto& s = o.a_states[ai];
          const int rk = s[rc] + s[rr] + j1, rb = s[cr] + s[rr] + j2;
          d_rydberg.push_back(rk - rb);
          d_pairs.push_back(0.5 * (rk * (rk - 1) - rb * (rb - 1)));
          s_rydberg.push_back(rk + rb);
        }
    // Single-atom transition x -> y on group A pulls from N' - e_y + e_x with
    // weight N'_y.
    const std::array<std::tuple<int, int, Kind>, 10> moves{{{cc, rc, ket_flip},
                                                            {rc, cc, ket_flip},
                                                            {cr, rr, ket_flip},
                                                            {rr, cr, ket_flip},
                                                            {cc, cr, bra_flip},
                                                            {cr, cc, bra_flip},
                                                            {rc, rr, bra_flip},
                                                            {rr, rc, bra_flip},
                                                            {rr, cc, jump_coupled},
                                                            {rr, oo, jump_other}}};
    for (std::size_t ai = 0; ai < o.a_states.size(); ++ai) {
      const auto& t = o.a_states[ai];
      for (const auto& [x, y, kind] : moves) {
        if (t[y] == 0) continue;
        auto src = t;
        --src[y];
        ++src[x];
        const int si = o.a_index.at(src);
        for (int j1 = 0; j1 <= b1; ++j1)
          for (int j2 = 0; j2 <= b2; ++j2)
            terms.push_back({o.state(int(ai), j1, j2), o.state(si, j1, j2), kind, double(t[y])});
      }
      for (int j1 = 0; j1 <= b1; ++j1)
        for (int j2 = 0; j2 <= b2; ++j2) {
          const int tgt = o.state(int(ai), j1, j2);
          if (j1 > 0) terms.push_back({tgt, o.state(int(ai), j1 - 1, j2), ket_flip, double(j1)});
          if (j1 < b1) terms.push_back({tgt, o.state(int(ai), j1 + 1, j2), ket_flip, double(b1 - j1)});
          if (j2 > 0) terms.push_back({tgt, o.state(int(ai), j1, j2 - 1), bra_flip, double(j2)});
          if (j2 < b2) terms.push_back({tgt, o.state(int(ai), j1, j2 + 1), bra_flip, double(b2 - j2)});
        }
    }
    orbit_index[{a, b1, b2, c0}] = static_cast<int>(orbits.size());
    orbits.push_back(std::move(o));
  }

  void apply(LaserPoint p, double v, double rate, double to_coupled, double to_other,
             const Eigen::VectorXcd& x, Eigen::VectorXcd& out) const {
    const double g2 = 0.5 * rate;
    for (int s = 0; s < dim; ++s)
      out[s] = cplx(-g2 * s_rydberg[s], p.detuning * d_rydberg[s] - v * d_pairs[s]) * x[s];
    const std::array<cplx, 4> coef{-kI * (0.5 * p.rabi), kI * (0.5 * p.rabi),
                                   cplx(to_coupled * rate), cplx(to_other * rate)};
    for (const auto& t : terms) out[t.target] += coef[t.kind] * t.factor * x[t.source];
  }

  Eigen::VectorXcd initial() const {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    for (const auto& o : orbits) x[o.state(o.a_index.at({o.a, 0, 0, 0, 0}), 0, 0)] = 1.0;
    return x;
  }
};

const OrbitSystem& orbit_system() {
  static const OrbitSystem sys;
  return sys;
}

// Single-pulse superoperator on the qubit subspace from the evolved orbits.
Eigen::MatrixXcd orbit_superoperator(const OrbitSystem& sys, const Eigen::VectorXcd& x,
                                     CoupledLevel coupled) {
  const bool down = coupled == CoupledLevel::down;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(256, 256);
  for (int zx = 0; zx < 16; ++zx)
    for (int zy = 0; zy < 16; ++zy) {
      // Coupled atoms: bit set when down is coupled, clear otherwise.
      const int kc = down ? zx : (~zx & 15), bc = down ? zy : (~zy & 15);
      const int amask = kc & bc;
      const int a = std::popcount(unsigned(amask)), b1 = std::popcount(unsigned(kc & ~bc & 15)),
                b2 = std::popcount(unsigned(~kc & bc & 15));
      const auto& o = sys.orbits[sys.orbit_index.at({a, b1, b2, 4 - a - b1 - b2})];
      std::vector<int> members;
      for (int k = 0; k < 4; ++k)
        if (amask >> k & 1) members.push_back(k);
      for (int j = 0; j <= a; ++j) {
        const cplx coef = x[o.state(o.a_index.at({a - j, 0, 0, 0, j}), 0, 0)];
        if (coef == cplx(0.0)) continue;
        // Every size-j subset of group A decayed into the uncoupled level.
        for (int sub = 0; sub < (1 << a); ++sub) {
          if (std::popcount(unsigned(sub)) != j) continue;
          int flip = 0;
          for (int m = 0; m < a; ++m)
            if (sub >> m & 1) flip |= 1 << members[m];
          // Coupled-to-uncoupled toggles the bit in both ket and bra.
          const int ox = zx ^ flip, oy = zy ^ flip;
          out(ox + 16 * oy, zx + 16 * zy) += coef;
        }
      }
    }
  return out;
}

Eigen::VectorXcd evolve_orbits(const PiecewisePulse& pulse, CoupledLevel coupled,
                               PlaquetteConfig config, const DecayModel& decay,
                               const LindbladOptions& opt) {
  const OrbitSystem& sys = orbit_system();
  const bool down = coupled == CoupledLevel::down;
  const double to_c = down ? decay.to_down : decay.to_up;
  const double to_o = down ? decay.to_up : decay.to_down;
  Eigen::VectorXcd x = sys.initial();
  rk4_pulse(pulse, 4, config, decay.rate, opt, x,
            [&](LaserPoint p, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
              sys.apply(p, config.interaction, decay.rate, to_c, to_o, in, out);
            });
  return x;
}

void validate_channel_inputs(const PiecewisePulse& pd, const PiecewisePulse& pu,
                             const DecayModel& decay) {
  pd.require_dark_ends();
  pu.require_dark_ends();
  decay.validate();
}

}  // namespace

Eigen::MatrixXcd lindblad_evolve(const PiecewisePulse& pulse, CoupledLevel coupled,
                                 PlaquetteConfig config, const DecayModel& decay,
                                 const Eigen::MatrixXcd& rho0, const LindbladOptions& options) {
  decay.validate();
  if (rho0.rows() != rho0.cols()) throw InputError("density matrix must be square");
  const int atoms = atoms_for_dimension(rho0.rows());
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw InputError("density matrix must be Hermitian");
  const double tr0 = rho0.trace().real();
  if (tr0 > 1.0 + 1e-10) throw InputError("density matrix trace exceeds 1");
  const FullLiouvillian L(atoms, coupled, config, decay);
  Eigen::MatrixXcd rho = rho0;
  rk4_pulse(pulse, atoms, config, decay.rate, options, rho,
            [&](LaserPoint p, const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
              L.apply(p, in, out);
            });
  if (rho.trace().real() > tr0 + 1e-8)
    throw NumericalError("master-equation trace grew beyond tolerance");
  return rho;
}

Eigen::MatrixXcd QuantumChannel::apply(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != 16 || rho.cols() != 16) throw InputError("channel input must be 16x16");
  const Eigen::VectorXcd out = superop * rho.reshaped();
  return out.reshaped(16, 16);
}

QuantumChannel identity_channel() {
  return {Eigen::MatrixXcd::Identity(256, 256), true, "identity"};
}

QuantumChannel depolarizing_channel() {
  QuantumChannel c{Eigen::MatrixXcd::Zero(256, 256), true, "completely depolarizing"};
  for (int i = 0; i < 16; ++i)
    for (int w = 0; w < 16; ++w) c.superop(w + 16 * w, i + 16 * i) = 1.0 / 16.0;
  return c;
}

QuantumChannel zero_channel() { return {Eigen::MatrixXcd::Zero(256, 256), false, "zero"}; }

QuantumChannel unitary_channel(const GateAmplitudes& amplitudes) {
  QuantumChannel c{Eigen::MatrixXcd::Zero(256, 256), true, "coherent"};
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      c.superop(i + 16 * j, i + 16 * j) = amplitudes[i] * std::conj(amplitudes[j]);
  return c;
}

QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
  return {second.superop * first.superop, second.trace_preserving && first.trace_preserving,
          second.provenance + " after " + first.provenance};
}

Eigen::MatrixXcd choi_matrix(const QuantumChannel& channel) {
  Eigen::MatrixXcd choi(256, 256);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b)
          choi(16 * i + a, 16 * j + b) = channel.superop(a + 16 * b, i + 16 * j);
  return choi;
}

double min_choi_eigenvalue(const QuantumChannel& channel) {
  const Eigen::MatrixXcd c = choi_matrix(channel);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (c + c.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_output_trace(const QuantumChannel& channel) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int w = 0; w < 16; ++w) m(j, i) += channel.superop(w + 16 * w, i + 16 * j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Eigen::VectorXcd full_channel_column(const PiecewisePulse& pulse_down,
                                     const PiecewisePulse& pulse_up, PlaquetteConfig config,
                                     const DecayModel& decay, int x, int y,
                                     const LindbladOptions& options) {
  validate_channel_inputs(pulse_down, pulse_up, decay);
  if (x < 0 || x > 15 || y < 0 || y > 15) throw InputError("basis index outside 0..15");
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(16, 16);
  e(x, y) = 1.0;
  Eigen::MatrixXcd r = lift_qubits(e);
  auto step = [&](const PiecewisePulse& p, CoupledLevel c) {
    const FullLiouvillian L(4, c, config, decay);
    rk4_pulse(p, 4, config, decay.rate, options, r,
              [&](LaserPoint pt, const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
                L.apply(pt, in, out);
              });
    r = lift_qubits(project_qubits(r));
  };
  step(pulse_down, CoupledLevel::down);
  step(pulse_up, CoupledLevel::up);
  const Eigen::MatrixXcd out = project_qubits(r);
  return out.reshaped();
}

QuantumChannel gate_channel(const PiecewisePulse& pulse_down, const PiecewisePulse& pulse_up,
                            PlaquetteConfig config, const DecayModel& decay,
                            const ChannelOptions& options) {
  validate_channel_inputs(pulse_down, pulse_up, decay);
  QuantumChannel c;
  c.trace_preserving = decay.rate == 0.0;
  if (options.method == ChannelMethod::full) {
    c.provenance = "full-space master equation";
    for (int x = 0; x < 16; ++x)
      for (int y = 0; y < 16; ++y)
        c.superop.col(x + 16 * y) =
            full_channel_column(pulse_down, pulse_up, config, decay, x, y, options.integrator);
    return c;
  }
  c.provenance = "symmetric master equation";
  const OrbitSystem& sys = orbit_system();
  const Eigen::VectorXcd x1 =
      evolve_orbits(pulse_down, CoupledLevel::down, config, decay, options.integrator);
  const bool reuse = pulse_down == pulse_up && decay.to_down == decay.to_up;
  const Eigen::VectorXcd x2 =
      reuse ? x1 : evolve_orbits(pulse_up, CoupledLevel::up, config, decay, options.integrator);
  c.superop = orbit_superoperator(sys, x2, CoupledLevel::up) *
              orbit_superoperator(sys, x1, CoupledLevel::down);
  return c;
}

double average_gate_fidelity(const QuantumChannel& channel, const GateTarget& target) {
  cplx tr = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      tr += std::conj(target.amplitude(i)) * target.amplitude(j) *
            channel.superop(i + 16 * j, i + 16 * j);
  // conj(U) x U is invariant under a global phase of U, so no phase search is needed.
  return (16.0 + tr.real()) / 272.0;
}

double average_gate_fidelity(const QuantumChannel& channel, double gamma) {
  return average_gate_fidelity(channel, GateTarget::from_gamma(gamma));
}

}  // namespace rydpar
