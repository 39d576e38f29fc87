#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "rydpar/errors.hpp"
#include "rydpar/io.hpp"

namespace rydpar::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kDefaultInteraction = 251.327;  // 2 pi x 40 MHz in rad/us

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Reads keys with defaults and records the value actually used, so the
// manifest digest covers the effective configuration. Keys that are never
// read are rejected as typos.
class Params {
 public:
  explicit Params(json j, fs::path base = {}) : j_(std::move(j)), base_(std::move(base)) {
    if (!j_.is_object()) throw InputError("configuration must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const std::string& key, double fallback) {
    return record(key, get_number(j_, key, fallback));
  }
  double number(const std::string& key) { return record(key, get_number(j_, key)); }
  int integer(const std::string& key, int fallback) {
    return record(key, get_int(j_, key, fallback));
  }
  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) {
    return record(key, get_uint(j_, key, fallback));
  }
  bool boolean(const std::string& key, bool fallback) {
    return record(key, get_bool(j_, key, fallback));
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return record(key, get_string(j_, key, fallback));
  }
  const json& raw(const std::string& key) {
    if (!has(key)) throw InputError("missing key '" + key + "'");
    seen_.insert(key);
    return j_.at(key);
  }
  void set(const std::string& key, json value) {
    seen_.insert(key);
    effective_[key] = std::move(value);
  }
  fs::path resolve(const std::string& path) const {
    const fs::path p(path);
    return p.is_relative() && !base_.empty() ? base_ / p : p;
  }

  json finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw InputError("unknown configuration key '" + key + "'");
    return effective_;
  }

 private:
  template <class T>
  T record(const std::string& key, T value) {
    seen_.insert(key);
    effective_[key] = value;
    return value;
  }

  json j_;
  fs::path base_;
  json effective_ = json::object();
  std::set<std::string> seen_;
};

Params load_params(const std::string& path) {
  return Params(read_json_file(path), fs::path(path).parent_path());
}

std::uint64_t take_seed(Params& p, const Common& c) {
  const std::uint64_t s = c.seed ? *c.seed : p.uinteger("seed", 0);
  p.set("seed", s);
  return s;
}

int take_budget(Params& p, const Common& c, const std::string& key, int fallback) {
  const int b = c.budget ? *c.budget : p.integer(key, fallback);
  if (b < 1) throw InputError("'" + key + "' must be at least 1");
  p.set(key, b);
  return b;
}

// One invocation: output directory, manifest, and the list of files written.
class Session {
 public:
  Session(std::string command, const Common& c, std::string config_path, const json& effective,
          std::uint64_t seed)
      : out_(c.out), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_);
    manifest_.command = std::move(command);
    manifest_.config_path = std::move(config_path);
    manifest_.config_text = effective.dump();
    manifest_.seed = seed;
    manifest_.output_dir = out_.string();
    manifest_.started = utc_now();
  }

  const RunManifest& manifest() const { return manifest_; }

  fs::path file(const std::string& name) {
    outputs_.push_back(name);
    return out_ / name;
  }
  void write(const std::string& name, json value) {
    value["manifest_digest"] = manifest_.digest();
    write_json_file(file(name), value);
  }

  void finish() {
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m = manifest_.to_json();
    m["outputs"] = outputs_;
    write_json_file(out_ / "manifest.json", m);
    std::cerr << manifest_.command << ": wrote " << outputs_.size() << " file(s) to "
              << out_.string() << " in " << format_seconds(manifest_.wall_seconds) << '\n';
  }

  static std::string format_seconds(double s) {
    std::ostringstream o;
    o.precision(3);
    o << s << " s";
    return o.str();
  }

 private:
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
  std::vector<std::string> outputs_;
};

std::ofstream open_csv(Session& s, const std::string& name) {
  std::ofstream f(s.file(name));
  if (!f) throw InputError("cannot write " + name);
  return f;
}

ParityLayout bipartite_from_json(const json& j) {
  const json& c = j.at("couplings");
  if (!c.is_array() || c.empty()) throw InputError("'couplings' must be a nonempty matrix");
  std::vector<std::vector<double>> m;
  for (const auto& row : c) {
    if (!row.is_array()) throw InputError("'couplings' rows must be arrays");
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number()) throw InputError("couplings must be numbers");
      r.push_back(v.get<double>());
    }
    m.push_back(std::move(r));
  }
  for (const auto& r : m)
    if (r.size() != m.front().size()) throw InputError("'couplings' rows differ in length");
  ParityLayout l = encode_complete_bipartite(static_cast<int>(m.size()),
                                             static_cast<int>(m.front().size()), m);
  if (j.contains("penalty_strength")) l.penalty_strength = get_number(j, "penalty_strength");
  return l;
}

// A layout file path, an inline layout, an inline bipartite coupling matrix,
// or a logical problem.
ParityLayout take_layout(Params& p) {
  ParityLayout l;
  if (p.has("layout")) {
    const json& v = p.raw("layout");
    l = v.is_string() ? layout_from_json(read_json_file(p.resolve(v.get<std::string>())))
                      : layout_from_json(v);
  } else if (p.has("bipartite")) {
    l = bipartite_from_json(p.raw("bipartite"));
  } else if (p.has("problem")) {
    l = encode_problem(problem_from_json(p.raw("problem")));
  } else {
    throw InputError("configuration needs 'layout', 'bipartite' or 'problem'");
  }
  const auto bad = validate_layout(l);
  if (!bad.empty()) throw InputError("layout fails validation: " + bad.front().message);
  p.set("layout", to_json(l));
  return l;
}

json violation_json(const LayoutViolation& v) {
  return {{"plaquette", v.plaquette},
          {"odd_indices", v.odd_indices},
          {"non_contiguous", v.non_contiguous},
          {"message", v.message}};
}

std::vector<int> parse_sectors(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int n = -1;
    try {
      n = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || n < 0 || n > 4)
      throw InputError("sector '" + item + "' is not an integer in 0..4");
    out.push_back(n);
  }
  if (out.empty()) throw InputError("sector list is empty");
  return out;
}

LaserPoint take_point(Params& p, const std::string& key) {
  const LaserPoint pt = point_from_json(p.raw(key));
  p.set(key, to_json(pt));
  return pt;
}

void progress(const std::string& command, const std::string& text) {
  std::cerr << command << ": " << text << std::endl;
}

}  // namespace

int run_encode(const EncodeArgs& a, const Common& c) {
  const json in = read_json_file(a.input);
  if (!in.is_object()) throw InputError(a.input + ": expected a JSON object");
  const bool is_layout = in.contains("qubits");
  if (a.validate_only && !is_layout) throw InputError("--validate-only expects a layout file");
  ParityLayout layout;
  if (is_layout)
    layout = layout_from_json(in);
  else if (in.contains("bipartite"))
    layout = bipartite_from_json(in.at("bipartite"));
  else
    layout = encode_problem(problem_from_json(in));

  const auto violations = validate_layout(layout);
  json report = {{"qubits", layout.num_qubits()},
                 {"plaquettes", layout.plaquettes.size()},
                 {"grid_rows", layout.grid_rows},
                 {"grid_cols", layout.grid_cols},
                 {"penalty_strength", layout.penalty_strength},
                 {"valid", violations.empty()},
                 {"violations", json::array()}};
  for (const auto& v : violations) {
    report["violations"].push_back(violation_json(v));
    std::cerr << "encode: " << v.message << '\n';
  }
  if (violations.empty() && layout.num_qubits() <= 24) {
    const Extrema e = enumerate_extrema(layout);
    report["e_min"] = e.e_min;
    report["e_max"] = e.e_max;
  }
  std::cout << report.dump(2) << '\n';
  if (!a.validate_only) {
    Session s("encode", c, a.input, in, 0);
    s.write("layout.json", to_json(layout));
    s.write("report.json", report);
    s.finish();
  }
  return violations.empty() ? 0 : 2;
}

int run_spectrum(const SpectrumArgs& a, const Common& c) {
  const double v = a.interaction;
  if (!(v > 0.0)) throw InputError("interaction must be positive");
  const double rabi = a.rabi.value_or(v / 2);
  const double lo = a.detuning_min.value_or(-v), hi = a.detuning_max.value_or(3 * v);
  if (!(hi > lo) || a.points < 2) throw InputError("detuning range needs max > min and points >= 2");
  const std::vector<int> sectors = parse_sectors(a.sectors);
  const json effective = {{"interaction", v}, {"rabi", rabi},     {"detuning_min", lo},
                          {"detuning_max", hi}, {"points", a.points}, {"sectors", sectors}};
  Session s("spectrum", c, "", effective, c.seed.value_or(0));
  std::ofstream f = open_csv(s, "spectrum.csv");
  CsvWriter w(f, s.manifest(), {"delta", "n", "eigenvalue_index", "energy", "overlap_with_k0"},
              "delta rad/us, energy rad/us, rabi " + format_double(rabi) + " rad/us, V " +
                  format_double(v) + " rad/us");
  const PlaquetteConfig config{v};
  for (int i = 0; i < a.points; ++i) {
    const double d = lo + (hi - lo) * i / (a.points - 1);
    for (int n : sectors) {
      const SectorSpectrum sp = sector_spectrum(n, {rabi, d}, config);
      for (int k = 0; k <= n; ++k) {
        w << d << n << k << sp.energies[k] << sp.vectors(0, k) * sp.vectors(0, k);
        w.end_row();
      }
    }
  }
  s.finish();
  return 0;
}

int run_ramp_optimize(const std::string& config, const Common& c) {
  Params p = load_params(config);
  const double v = p.number("interaction", kDefaultInteraction);
  const PlaquetteConfig pc{v};
  RampProblem prob;
  prob.start = take_point(p, "start");
  prob.end = take_point(p, "end");
  prob.interior = p.integer("interior", 1);
  prob.epsilon = p.number("epsilon", 1e-3);
  if (p.has("sectors")) prob.sectors = p.raw("sectors").get<std::vector<int>>();
  p.set("sectors", prob.sectors);
  const GateBox box = GateBox::defaults(v, p.number("rabi_max", v));
  prob.bounds = {box.rabi_max, box.edge_detuning_min, box.hold_detuning_max, 0.0, 1.0};
  prob.bounds.q_min = p.number("q_min", prob.bounds.q_min);
  prob.bounds.q_max = p.number("q_max", prob.bounds.q_max);
  RampOptions o;
  o.seed = take_seed(p, c);
  o.budget = take_budget(p, c, "budget", o.budget);
  o.local_evaluations = p.integer("local_evaluations", o.local_evaluations);
  o.initial_q = p.number("initial_q", o.initial_q);
  const bool fixed_q = p.boolean("fixed_q", false);
  const bool linear = p.boolean("linear_reference", true);
  const int curve_points = p.integer("curve_points", 40);
  if (curve_points < 2) throw InputError("'curve_points' must be at least 2");
  const json effective = p.finish();

  Session s("ramp-optimize", c, config, effective, o.seed);
  OptimizedRamp best;
  if (fixed_q) {
    AdiabaticPath path = spline_path(prob.start, prob.end);
    path.tracked = prob.tracked.value_or(dark_tracked_indices(prob.start, pc));
    path.sectors = prob.sectors;
    best.path = reparametrize(path, o.initial_q, pc, o.schedule);
    best.report = ramp_report(best.path, prob.epsilon, pc, o.scan);
    best.seed = o.seed;
  } else {
    progress("ramp-optimize", "optimizing with budget " + std::to_string(o.budget));
    best = optimize_ramp(prob, pc, o);
  }
  progress("ramp-optimize", "T_eps = " + format_double(best.report.duration) + " us");
  json out = {{"path", to_json(best.path)},
              {"report", to_json(best.report)},
              {"epsilon", prob.epsilon},
              {"interaction", v},
              {"seed", best.seed},
              {"evaluations", best.evaluations}};
  std::optional<OptimizedRamp> ref;
  if (linear) {
    ref = linear_reference(prob, pc, o.scan);
    out["linear_reference"] = {{"path", to_json(ref->path)}, {"report", to_json(ref->report)}};
    progress("ramp-optimize", "linear T_eps = " + format_double(ref->report.duration) + " us");
  }
  s.write("ramp.json", out);

  std::ofstream f = open_csv(s, "ramp_curve.csv");
  CsvWriter w(f, s.manifest(), {"ramp", "T", "sector", "infidelity"}, "T us");
  auto curve = [&](const std::string& name, const OptimizedRamp& r) {
    const double t_eps = r.report.duration;
    for (int i = 0; i < curve_points; ++i) {
      const double t = t_eps * 0.1 * std::pow(30.0, static_cast<double>(i) / (curve_points - 1));
      const auto fid = ramp_fidelity(r.path, t, pc);
      for (std::size_t k = 0; k < fid.size(); ++k) {
        w << name << t << r.path.sectors[k] << 1.0 - fid[k];
        w.end_row();
      }
    }
  };
  curve("optimized", best);
  if (ref) curve("linear", *ref);
  s.finish();
  return 0;
}

int run_calibrate(const std::string& config, const Common& c) {
  Params p = load_params(config);
  const double v = p.number("interaction", kDefaultInteraction);
  const double rabi_max = p.number("rabi_max", v);
  const double eps = p.number("epsilon", 1e-3);
  GateBox box = GateBox::defaults(v, rabi_max);
  if (p.has("box")) box = box_from_json(p.raw("box"));
  p.set("box", to_json(box));
  CalibrationOptions o;
  o.seed = take_seed(p, c);
  o.ramp.seed = o.seed;
  o.interior = p.integer("interior", o.interior);
  o.grid = p.integer("grid", o.grid);
  o.m_max = p.integer("m_max", o.m_max);
  o.local_evaluations = p.integer("local_evaluations", o.local_evaluations);
  o.optimize_ramps = p.boolean("optimize_ramps", false);
  o.ramp.budget = p.integer("ramp_budget", o.ramp.budget);
  o.ramp.initial_q = p.number("initial_q", o.ramp.initial_q);
  std::optional<Waypoints> fixed;
  if (p.has("waypoints")) {
    fixed = waypoints_from_json(p.raw("waypoints"));
    p.set("waypoints", to_json(*fixed));
  } else {
    o.budget = take_budget(p, c, "budget", 20);
    if (p.has("initial_waypoints")) {
      o.initial = waypoints_from_json(p.raw("initial_waypoints"));
      p.set("initial_waypoints", to_json(*o.initial));
    }
  }
  const json effective = p.finish();

  Session s("calibrate", c, config, effective, o.seed);
  const PlaquetteConfig pc{v};
  GateCalibration cal;
  if (fixed) {
    cal = calibrate_waypoints(*fixed, box, pc, eps, o);
  } else {
    CalibrationOptions search = o;
    search.on_candidate = [](int k, double gate, double best) {
      if (k % 10 == 0 || k == 1)
        progress("calibrate", "candidate " + std::to_string(k) + " gate " +
                                  (std::isfinite(gate) ? format_double(gate) : "infeasible") +
                                  " best " + format_double(best) + " us");
    };
    const GateCalibration found = optimize_waypoints(box, pc, eps, search);
    cal = calibrate_waypoints(found.waypoints, box, pc, eps, o);
    cal.budget = found.budget;
    cal.evaluations = found.evaluations;
  }
  progress("calibrate", "worst-case gate " + format_double(cal.worst_gate) + " us");
  s.write("calibration.json", to_json(cal));
  s.finish();
  return 0;
}

int run_gate(const GateArgs& a, const Common& c) {
  const json cal_json = read_json_file(a.calibration);
  const GateCalibration cal = calibration_from_json(cal_json);
  if (a.gamma && (a.dphi_a || a.dphi_b))
    throw InputError("give either --gamma or --dphi-a/--dphi-b");
  if (a.dphi_a.has_value() != a.dphi_b.has_value())
    throw InputError("--dphi-a and --dphi-b go together");
  if (!(a.decay_rate >= 0.0)) throw InputError("decay rate must be nonnegative");
  const GatePulse g = a.dphi_a ? gate_for_targets(cal, *a.dphi_a, *a.dphi_b)
                               : gate_for_gamma(cal, a.gamma.value_or(kPi));
  const GateTarget target = GateTarget::from_phase_differences(g.dphi_a, g.dphi_b);
  json effective = {{"calibration", cal_json}, {"decay_rate", a.decay_rate}};
  if (a.dphi_a) {
    effective["dphi_a"] = *a.dphi_a;
    effective["dphi_b"] = *a.dphi_b;
  } else {
    effective["gamma"] = a.gamma.value_or(kPi);
  }
  Session s("gate", c, a.calibration, effective, c.seed.value_or(0));
  const double coherent =
      coherent_average_fidelity(coherent_gate_channel(g.pulse, g.pulse, cal.config), target);
  json report = {{"dphi_a", g.dphi_a},
                 {"dphi_b", g.dphi_b},
                 {"hold_a_us", g.hold.t_a},
                 {"hold_b_us", g.hold.t_b},
                 {"gate_time_us", g.gate_time()},
                 {"coherent_fidelity", coherent}};
  if (a.decay_rate > 0.0) {
    DecayModel d;
    d.rate = a.decay_rate;
    report["decay_rate"] = a.decay_rate;
    report["fidelity_with_decay"] =
        average_gate_fidelity(gate_channel(g.pulse, g.pulse, cal.config, d), target);
  }
  s.write("pulse.json", {{"pulse", to_json(g.pulse)}, {"gate_time_us", g.gate_time()}});
  s.write("gate_report.json", report);
  std::cout << report.dump(2) << '\n';
  s.finish();
  return 0;
}

int run_error_curve(const std::string& config, const Common& c) {
  Params p = load_params(config);
  const json& list = p.raw("calibrations");
  if (!list.is_array() || list.empty()) throw InputError("'calibrations' must be a nonempty array");
  std::vector<GateCalibration> levels;
  json used = json::array();
  for (const auto& item : list) {
    if (!item.is_string()) throw InputError("'calibrations' entries must be file paths");
    const json j = read_json_file(p.resolve(item.get<std::string>()));
    levels.push_back(calibration_from_json(j));
    used.push_back(j);
  }
  p.set("calibrations", used);
  ErrorCurveOptions o;
  o.seed = take_seed(p, c);
  o.samples = take_budget(p, c, "samples", 100);
  if (o.samples < 10) throw InputError("'samples' must be at least 10");
  o.gamma_only = p.boolean("gamma_only", false);
  const double rate = p.number("decay_rate", 0.0);
  if (rate < 0.0) throw InputError("'decay_rate' must be nonnegative");
  if (rate > 0.0) {
    DecayModel d;
    d.rate = rate;
    o.decay = d;
  }
  const json effective = p.finish();

  Session s("error-curve", c, config, effective, o.seed);
  std::ofstream f = open_csv(s, "error_curve.csv");
  CsvWriter w(f, s.manifest(),
              {"epsilon_level", "T_gate_us", "mean_error", "n_samples", "decay_rate",
               "standard_error", "mean_sampled_gate_us"},
              "T_gate_us us, decay_rate 1/us, mean_sampled_gate_us us");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const ErrorCurveRow r = error_level(levels[i], o);
    w << r.epsilon << r.gate_time << r.mean_error << r.samples << r.decay_rate
      << r.standard_error << r.mean_duration;
    w.end_row();
    progress("error-curve", "level " + std::to_string(i + 1) + "/" +
                                std::to_string(levels.size()) + " epsilon " +
                                format_double(r.epsilon) + " error " + format_double(r.mean_error));
  }
  s.finish();
  return 0;
}

namespace {

struct QaoaSetup {
  ParityLayout layout;
  int depth = 3;
  NoiseModel noise;
  OptimizeOptions options;
};

QaoaSetup take_qaoa(Params& p, const Common& c) {
  QaoaSetup q;
  q.layout = take_layout(p);
  q.depth = p.integer("depth", 3);
  q.noise.p1 = p.number("p1", 5e-4);
  q.options.seed = take_seed(p, c);
  q.options.updates = take_budget(p, c, "updates", 200);
  q.options.shots = p.integer("shots", 500);
  q.options.final_shots = p.integer("final_shots", 5000);
  q.options.proposal_scale = p.number("proposal_scale", 0.1);
  q.options.remeasure = p.boolean("remeasure", false);
  return q;
}

}  // namespace

int run_qaoa(const std::string& config, const Common& c) {
  Params p = load_params(config);
  QaoaSetup q = take_qaoa(p, c);
  q.noise.p4 = p.number("p4", 1e-4);
  q.noise.validate();
  const json effective = p.finish();

  Session s("qaoa", c, config, effective, q.options.seed);
  QaoaSimulator sim(q.layout);
  sim.set_threads(c.threads);
  const Extrema ex = enumerate_extrema(q.layout);
  const int updates = q.options.updates;
  q.options.on_update = [updates](const UpdateRecord& r) {
    if (r.update % 10 == 0 || r.update == updates)
      progress("qaoa", "update " + std::to_string(r.update) + "/" + std::to_string(updates) +
                           " best " + format_double(r.best_energy));
  };
  const QaoaRun run = stochastic_optimize(sim, q.depth, q.noise, ex, q.options);

  std::ofstream f = open_csv(s, "qaoa_updates.csv");
  CsvWriter w(f, s.manifest(),
              {"update", "proposed_param_index", "old_value", "new_value", "energy_estimate",
               "stderr", "accepted", "best_energy", "running_mean_energy", "residual_estimate",
               "running_mean_residual"},
              "angles rad, energies in units of the logical couplings");
  double sum = 0.0;
  for (const auto& r : run.records) {
    sum += r.energy;
    const double mean = sum / r.update;
    w << r.update << r.param_index << r.old_value << r.new_value << r.energy << r.standard_error
      << (r.accepted ? 1 : 0) << r.best_energy << mean
      << residual_energy(r.energy, ex.e_min, ex.e_max) << residual_energy(mean, ex.e_min, ex.e_max);
    w.end_row();
  }
  s.write("qaoa_result.json", {{"params", to_json(run.params)},
                               {"initial_energy", run.initial_energy},
                               {"final_energy", run.final_energy.mean},
                               {"final_stderr", run.final_energy.standard_error},
                               {"final_residual", run.final_residual},
                               {"e_min", ex.e_min},
                               {"e_max", ex.e_max}});
  s.finish();
  return 0;
}

int run_ensemble(const std::string& config, const Common& c) {
  Params p = load_params(config);
  QaoaSetup q = take_qaoa(p, c);
  std::vector<double> levels{1e-4, 1e-3, 1e-2, 1e-1};
  if (p.has("p4_levels")) levels = p.raw("p4_levels").get<std::vector<double>>();
  if (levels.empty()) throw InputError("'p4_levels' is empty");
  for (double l : levels) NoiseModel{q.noise.p1, l}.validate();
  p.set("p4_levels", levels);
  const int runs = p.integer("runs", 10);
  const json effective = p.finish();

  Session s("ensemble", c, config, effective, q.options.seed);
  QaoaSimulator sim(q.layout);
  sim.set_threads(c.threads);
  const Extrema ex = enumerate_extrema(q.layout);
  int finished = 0;
  const int total = runs * static_cast<int>(levels.size());
  const int updates = q.options.updates;
  q.options.on_update = [&](const UpdateRecord& r) {
    if (r.update == updates)
      progress("ensemble", "run " + std::to_string(++finished) + "/" + std::to_string(total) +
                               " done");
  };
  const auto rows = run_ensemble(sim, q.depth, q.noise.p1, levels, runs, ex, q.options);
  std::ofstream f = open_csv(s, "ensemble.csv");
  CsvWriter w(f, s.manifest(), {"p4", "run_id", "E_res_final", "median", "q25", "q75"},
              "E_res dimensionless");
  for (const auto& r : rows) {
    w << r.p4 << r.run << r.final_residual << r.median << r.q25 << r.q75;
    w.end_row();
  }
  s.finish();
  return 0;
}

}  // namespace rydpar::cli
