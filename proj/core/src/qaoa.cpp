#include "rydpar/qaoa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <thread>

#include "rydpar/errors.hpp"

namespace rydpar {

QaoaParams QaoaParams::zeros(int depth) {
  if (depth < 1) throw InputError("QAOA depth must be at least 1");
  const auto n = static_cast<std::size_t>(depth);
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

void QaoaParams::validate() const {
  if (alpha.empty() || alpha.size() != beta.size() || alpha.size() != gamma.size())
    throw InputError("QAOA angle vectors must share a length of at least 1");
}

double& QaoaParams::flat(int index) {
  const int p = depth();
  if (index < 0 || index >= 3 * p) throw InputError("parameter index out of range");
  if (index < p) return alpha[index];
  if (index < 2 * p) return beta[index - p];
  return gamma[index - 2 * p];
}

double QaoaParams::flat(int index) const { return const_cast<QaoaParams&>(*this).flat(index); }

void NoiseModel::validate() const {
  if (!(p1 >= 0.0 && p1 <= 1.0) || !(p4 >= 0.0 && p4 <= 1.0))
    throw InputError("error probabilities must lie in [0, 1]");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double standard_normal(std::mt19937_64& rng) {
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  const double v = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

// e^{-i s alpha X} on the pair (a, b) of every qubit-q doublet in [begin, end).
inline void rotate_pairs(double* psi, std::size_t begin, std::size_t end, std::size_t stride,
                         double c, double s) {
  for (std::size_t base = begin; base < end; base += 2 * stride) {
    double* a = psi + 2 * base;
    double* b = psi + 2 * (base + stride);
    for (std::size_t i = 0; i < 2 * stride; i += 2) {
      const double ar = a[i], ai = a[i + 1], br = b[i], bi = b[i + 1];
      a[i] = c * ar + s * bi;
      a[i + 1] = c * ai - s * br;
      b[i] = c * br + s * ai;
      b[i + 1] = c * bi - s * ar;
    }
  }
}

}  // namespace

std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t update, std::uint64_t shot) {
  return splitmix64(splitmix64(splitmix64(seed) ^ update) ^ (shot * 0xd1342543de82ef95ULL));
}

QaoaSimulator::QaoaSimulator(const ParityLayout& layout) : layout_(layout) {
  k_ = layout.num_qubits();
  if (k_ < 1 || k_ > 24) throw InputError("statevector simulation needs 1..24 qubits");
  for (int i = 0; i < k_; ++i)
    if (layout.qubits[i].id != i) throw InputError("qubit ids must be 0..K-1 in order");
  if (layout.plaquettes.size() > 32) throw InputError("at most 32 plaquettes supported");
  dim_ = std::size_t{1} << k_;
  for (const auto& p : layout.plaquettes) {
    std::uint64_t m = 0;
    for (int id : p.members) {
      if (id < 0 || id >= k_) throw InputError("plaquette member outside the layout");
      m |= std::uint64_t{1} << id;
    }
    plaquette_masks_.push_back(m);
  }
  low_bits_ = k_ / 2;
  auto pattern_table = [&](int first, int bits) {
    std::vector<std::uint32_t> t(std::size_t{1} << bits, 0);
    for (std::size_t v = 0; v < t.size(); ++v) {
      const std::uint64_t x = static_cast<std::uint64_t>(v) << first;
      for (std::size_t q = 0; q < plaquette_masks_.size(); ++q)
        t[v] |= static_cast<std::uint32_t>(std::popcount(x & plaquette_masks_[q]) & 1) << q;
    }
    return t;
  };
  pattern_low_ = pattern_table(0, low_bits_);
  pattern_high_ = pattern_table(low_bits_, k_ - low_bits_);
  auto half_table = [&](int first, int bits) {
    std::vector<double> t(std::size_t{1} << bits, 0.0);
    for (std::size_t v = 0; v < t.size(); ++v)
      for (int b = 0; b < bits; ++b)
        t[v] += layout.qubits[first + b].local_field * ((v >> b) & 1 ? -1.0 : 1.0);
    return t;
  };
  field_low_ = half_table(0, low_bits_);
  field_high_ = half_table(low_bits_, k_ - low_bits_);
  const double np = static_cast<double>(plaquette_masks_.size());
  const std::size_t low_mask = (std::size_t{1} << low_bits_) - 1;
  energy_.resize(dim_);
  for (std::size_t x = 0; x < dim_; ++x)
    energy_[x] = field_low_[x & low_mask] + field_high_[x >> low_bits_] -
                 layout.penalty_strength *
                     (np - 2.0 * std::popcount(pattern_low_[x & low_mask] ^
                                               pattern_high_[x >> low_bits_]));
}

Statevector QaoaSimulator::plus_state() const {
  return Statevector(dim_, amp(1.0 / std::sqrt(static_cast<double>(dim_)), 0.0));
}

void QaoaSimulator::apply_layer_frame(Statevector& psi, double alpha, double beta, double gamma,
                                      const Frame& f) const {
  if (psi.size() != dim_) throw InputError("statevector dimension does not match layout");
  const int np = static_cast<int>(plaquette_masks_.size());
  std::vector<amp> ctab(np + 1), zlo(field_low_.size()), zhi(field_high_.size());
  for (int m = 0; m <= np; ++m) ctab[m] = std::polar(1.0, gamma * (np - 2 * m));
  for (std::size_t v = 0; v < zlo.size(); ++v) zlo[v] = std::polar(1.0, -beta * field_low_[v]);
  for (std::size_t v = 0; v < zhi.size(); ++v) zhi[v] = std::polar(1.0, -beta * field_high_[v]);
  const std::size_t low_mask = zlo.size() - 1;
  const auto flips = static_cast<std::uint32_t>(f.plaquette_flips);

  const double c = std::cos(alpha), s = std::sin(alpha);
  double* data = reinterpret_cast<double*>(psi.data());
  auto sign = [&](int q) { return (f.driver_sign >> q) & 1 ? -s : s; };

  // Two sweeps over memory: the diagonal and the low-qubit rotations per
  // cache block, then the high-qubit rotations on tiles that hold every
  // high-bit combination of a short contiguous run.
  constexpr int kBlockBits = 11;
  constexpr int kRunBits = 6;
  const int inner = std::min(k_, kBlockBits);
  const std::size_t block = std::size_t{1} << inner;
  std::vector<double> fre(block), fim(block);
  for (std::size_t b0 = 0; b0 < dim_; b0 += block) {
    // Phase factors of this block from the split tables, then one pass.
    for (std::size_t x = b0; x < b0 + block; ++x) {
      const std::size_t y = x ^ f.field_flip;
      const std::uint32_t pat = pattern_low_[x & low_mask] ^ pattern_high_[x >> low_bits_] ^ flips;
      const amp a = ctab[std::popcount(pat)], l = zlo[y & low_mask], h = zhi[y >> low_bits_];
      const double ur = a.real() * l.real() - a.imag() * l.imag();
      const double ui = a.real() * l.imag() + a.imag() * l.real();
      fre[x - b0] = ur * h.real() - ui * h.imag();
      fim[x - b0] = ur * h.imag() + ui * h.real();
    }
    double* p = data + 2 * b0;
    for (std::size_t i = 0; i < block; ++i) {
      const double xr = p[2 * i], xi = p[2 * i + 1];
      p[2 * i] = xr * fre[i] - xi * fim[i];
      p[2 * i + 1] = xr * fim[i] + xi * fre[i];
    }
    for (int q = 0; q < inner; ++q)
      rotate_pairs(data, b0, b0 + block, std::size_t{1} << q, c, sign(q));
  }
  if (k_ <= inner) return;
  const std::size_t run = std::size_t{1} << kRunBits;
  const std::size_t highs = dim_ >> inner;
  for (std::size_t r0 = 0; r0 < block; r0 += run) {
    for (int q = inner; q < k_; ++q) {
      const std::size_t hb = std::size_t{1} << (q - inner);
      const double sq = sign(q);
      for (std::size_t h = 0; h < highs; ++h) {
        if (h & hb) continue;
        double* a = data + 2 * ((h << inner) + r0);
        double* b = data + 2 * (((h | hb) << inner) + r0);
        for (std::size_t i = 0; i < 2 * run; i += 2) {
          const double ar = a[i], ai = a[i + 1], br = b[i], bi = b[i + 1];
          a[i] = c * ar + sq * bi;
          a[i + 1] = c * ai - sq * br;
          b[i] = c * br + sq * ai;
          b[i + 1] = c * bi - sq * ar;
        }
      }
    }
  }
}

void QaoaSimulator::apply_layer(Statevector& psi, double alpha, double beta,
                                double gamma) const {
  apply_layer_frame(psi, alpha, beta, gamma, Frame{});
}

Statevector QaoaSimulator::ideal_state(const QaoaParams& params) const {
  params.validate();
  Statevector psi = plus_state();
  for (int j = 0; j < params.depth(); ++j)
    apply_layer(psi, params.alpha[j], params.beta[j], params.gamma[j]);
  return psi;
}

Trajectory QaoaSimulator::draw_trajectory(const QaoaParams& params, const NoiseModel& noise,
                                          std::mt19937_64& rng) const {
  params.validate();
  noise.validate();
  Trajectory t;
  using Stage = PauliEvent::Stage;
  auto single = [&](int layer, Stage stage, int q) {
    ++t.single_qubit_slots;
    if (uniform01(rng) >= noise.p1) return;
    const auto pauli = 1 + uniform_below(rng, 3);  // X, Y, Z as (x, z) bits 01, 11, 10
    const std::uint64_t bit = std::uint64_t{1} << q;
    t.events.push_back({layer, stage, q, (pauli & 1) ? bit : 0, (pauli >= 2) ? bit : 0});
  };
  for (int j = 0; j < params.depth(); ++j) {
    for (std::size_t q = 0; q < plaquette_masks_.size(); ++q) {
      ++t.plaquette_slots;
      if (uniform01(rng) >= noise.p4) continue;
      const auto& members = layout_.plaquettes[q].members;
      const std::uint64_t code = 1 + uniform_below(rng, (std::uint64_t{1} << (2 * members.size())) - 1);
      PauliEvent e{j, Stage::constraint, static_cast<int>(q), 0, 0};
      for (std::size_t m = 0; m < members.size(); ++m) {
        const std::uint64_t bit = std::uint64_t{1} << members[m];
        if ((code >> (2 * m)) & 1) e.x |= bit;
        if ((code >> (2 * m + 1)) & 1) e.z |= bit;
      }
      t.events.push_back(e);
    }
    for (int q = 0; q < k_; ++q) single(j, Stage::field, q);
    for (int q = 0; q < k_; ++q) single(j, Stage::driver, q);
  }
  t.measurement = uniform01(rng);
  return t;
}

std::vector<QaoaSimulator::Frame> QaoaSimulator::frames(const QaoaParams& params,
                                                        const Trajectory& t,
                                                        std::uint64_t* final_x) const {
  using Stage = PauliEvent::Stage;
  std::vector<Frame> out(params.depth());
  std::uint64_t fx = 0, fz = 0;
  std::size_t e = 0;
  auto consume = [&](int layer, Stage stage, int slot) {
    while (e < t.events.size() && t.events[e].layer == layer && t.events[e].stage == stage &&
           t.events[e].slot == slot) {
      fx ^= t.events[e].x;
      fz ^= t.events[e].z;
      ++e;
    }
  };
  for (int j = 0; j < params.depth(); ++j) {
    Frame& f = out[j];
    for (std::size_t q = 0; q < plaquette_masks_.size(); ++q) {
      f.plaquette_flips |= static_cast<std::uint64_t>(std::popcount(fx & plaquette_masks_[q]) & 1) << q;
      consume(j, Stage::constraint, static_cast<int>(q));
    }
    // Field and driver gates act on their own qubit before its error, so only
    // the frame at stage entry matters.
    f.field_flip = fx;
    for (int q = 0; q < k_; ++q) consume(j, Stage::field, q);
    f.driver_sign = fz;
    for (int q = 0; q < k_; ++q) consume(j, Stage::driver, q);
  }
  if (e != t.events.size()) throw InputError("trajectory events out of circuit order");
  if (final_x) *final_x = fx;
  return out;
}

Statevector QaoaSimulator::trajectory_state(const QaoaParams& params, const Trajectory& t,
                                            std::uint64_t* outcome_flip) const {
  const auto fr = frames(params, t, outcome_flip);
  Statevector psi = plus_state();
  for (int j = 0; j < params.depth(); ++j)
    apply_layer_frame(psi, params.alpha[j], params.beta[j], params.gamma[j], fr[j]);
  return psi;
}

std::uint64_t QaoaSimulator::sample(const Statevector& psi, double u) const {
  // Layers are unitary, so the norm is 1 up to roundoff; the fallback below
  // covers the remainder.
  const double target = u;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t x = 0; x < dim_; ++x) {
    const double p = std::norm(psi[x]);
    if (p > 0.0) last = x;
    acc += p;
    if (acc > target) return x;
  }
  return last;
}

std::uint64_t QaoaSimulator::noisy_shot(const QaoaParams& params, const NoiseModel& noise,
                                        std::mt19937_64& rng) const {
  const Trajectory t = draw_trajectory(params, noise, rng);
  std::uint64_t flip = 0;
  const Statevector psi = trajectory_state(params, t, &flip);
  return sample(psi, t.measurement) ^ flip;
}

EnergyEstimate QaoaSimulator::estimate_energy(const QaoaParams& params, const NoiseModel& noise,
                                              int shots, std::uint64_t seed,
                                              std::uint64_t update) const {
  params.validate();
  noise.validate();
  if (shots < 1) throw InputError("shots must be at least 1");
  const int p = params.depth();
  std::vector<Statevector> checkpoints;
  Statevector psi = plus_state();
  for (int j = 0; j < p; ++j) {
    if (!noise.noiseless()) checkpoints.push_back(psi);
    apply_layer(psi, params.alpha[j], params.beta[j], params.gamma[j]);
  }
  std::vector<double> cdf(dim_);
  double acc = 0.0;
  for (std::size_t x = 0; x < dim_; ++x) cdf[x] = acc += std::norm(psi[x]);
  auto ideal_sample = [&](double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * acc);
    return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), dim_ - 1));
  };

  std::vector<double> energies(static_cast<std::size_t>(shots));
  auto run_shots = [&](int begin, int end) {
    Statevector work;
    for (int s = begin; s < end; ++s) {
      std::mt19937_64 rng(shot_seed(seed, update, static_cast<std::uint64_t>(s)));
      std::uint64_t y;
      if (noise.noiseless()) {
        y = ideal_sample(uniform01(rng));
      } else {
        const Trajectory t = draw_trajectory(params, noise, rng);
        std::uint64_t flip = 0;
        const auto fr = frames(params, t, &flip);
        int first = 0;
        while (first < p && fr[first].trivial()) ++first;
        if (first == p) {
          y = ideal_sample(t.measurement) ^ flip;
        } else {
          work = checkpoints[first];
          for (int j = first; j < p; ++j)
            apply_layer_frame(work, params.alpha[j], params.beta[j], params.gamma[j], fr[j]);
          y = sample(work, t.measurement) ^ flip;
        }
      }
      energies[s] = energy_[y];
    }
  };
  const int workers = noise.noiseless() ? 1 : std::clamp(threads_, 1, shots);
  if (workers == 1) {
    run_shots(0, shots);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(run_shots, shots * w / workers, shots * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }
  // Reduced in shot order so the result does not depend on the thread count.
  double sum = 0.0, sum2 = 0.0;
  for (double e : energies) {
    sum += e;
    sum2 += e * e;
  }
  EnergyEstimate out;
  out.shots = shots;
  out.mean = sum / shots;
  if (shots > 1) {
    const double var = std::max(0.0, (sum2 - sum * sum / shots) / (shots - 1));
    out.standard_error = std::sqrt(var / shots);
  }
  return out;
}

double residual_energy(double e_mean, double e_min, double e_max) {
  if (!(e_max > e_min)) throw InputError("residual energy needs E_max > E_min");
  return (e_mean - e_min) / (e_max - e_min);
}

QaoaRun stochastic_optimize(const QaoaSimulator& sim, int depth, const NoiseModel& noise,
                            const Extrema& extrema, const OptimizeOptions& opt) {
  if (opt.updates < 1) throw InputError("updates must be at least 1");
  if (opt.shots < 1 || opt.final_shots < 1) throw InputError("shots must be at least 1");
  if (!(opt.proposal_scale >= 0.0)) throw InputError("proposal scale must be nonnegative");
  QaoaRun run;
  run.seed = opt.seed;
  run.params = QaoaParams::zeros(depth);
  std::mt19937_64 rng(splitmix64(opt.seed ^ 0x5851f42d4c957f2dULL));
  constexpr std::uint64_t kRemeasure = std::uint64_t{1} << 40;
  double reference = sim.estimate_energy(run.params, noise, opt.shots, opt.seed, 0).mean;
  run.initial_energy = reference;
  for (int u = 1; u <= opt.updates; ++u) {
    UpdateRecord rec;
    rec.update = u;
    rec.param_index = static_cast<int>(uniform_below(rng, 3 * static_cast<std::uint64_t>(depth)));
    rec.old_value = run.params.flat(rec.param_index);
    rec.new_value = rec.old_value + opt.proposal_scale * standard_normal(rng);
    QaoaParams trial = run.params;
    trial.flat(rec.param_index) = rec.new_value;
    const EnergyEstimate est = sim.estimate_energy(trial, noise, opt.shots, opt.seed, u);
    if (opt.remeasure)
      reference = sim.estimate_energy(run.params, noise, opt.shots, opt.seed, kRemeasure + u).mean;
    rec.energy = est.mean;
    rec.standard_error = est.standard_error;
    rec.accepted = est.mean < reference;
    if (rec.accepted) {
      run.params = trial;
      reference = est.mean;
    }
    rec.best_energy = reference;
    run.records.push_back(rec);
    if (opt.on_update) opt.on_update(rec);
  }
  run.final_energy = sim.estimate_energy(run.params, noise, opt.final_shots, opt.seed,
                                         static_cast<std::uint64_t>(opt.updates) + 1);
  run.final_residual = residual_energy(run.final_energy.mean, extrema.e_min, extrema.e_max);
  return run;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 100.0)) throw InputError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<EnsembleRow> run_ensemble(const QaoaSimulator& sim, int depth, double p1,
                                      const std::vector<double>& p4_levels, int runs,
                                      const Extrema& extrema, const OptimizeOptions& options,
                                      std::vector<QaoaRun>* all_runs) {
  if (runs < 2) throw InputError("ensembles need at least 2 runs per level");
  std::vector<EnsembleRow> rows;
  for (std::size_t l = 0; l < p4_levels.size(); ++l) {
    std::vector<double> finals;
    const std::size_t first = rows.size();
    for (int r = 0; r < runs; ++r) {
      OptimizeOptions o = options;
      o.seed = splitmix64(splitmix64(options.seed) ^ (l << 20) ^ static_cast<std::uint64_t>(r));
      QaoaRun run = stochastic_optimize(sim, depth, {p1, p4_levels[l]}, extrema, o);
      finals.push_back(run.final_residual);
      rows.push_back({p4_levels[l], r, run.final_residual, 0.0, 0.0, 0.0});
      if (all_runs) all_runs->push_back(std::move(run));
    }
    const double med = percentile(finals, 50.0), q25 = percentile(finals, 25.0),
                 q75 = percentile(finals, 75.0);
    for (std::size_t i = first; i < rows.size(); ++i) {
      rows[i].median = med;
      rows[i].q25 = q25;
      rows[i].q75 = q75;
    }
  }
  return rows;
}

}  // namespace rydpar
