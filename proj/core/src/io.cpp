#include "rydpar/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rydpar/errors.hpp"

namespace rydpar {

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

const json& require(const json& j, const std::string& key) {
  if (!j.is_object()) throw InputError("expected an object while reading '" + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError("missing key '" + key + "'");
  return *it;
}

template <class T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw InputError("key '" + key + "' has the wrong type");
  }
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is one past the offending character
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw InputError(origin + ":" + line_column(text, at) + ": " + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

double get_number(const json& j, const std::string& key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw InputError("key '" + key + "' must be a number");
  return v.get<double>();
}

double get_number(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? get_number(j, key) : fallback;
}

int get_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw InputError("key '" + key + "' must be an integer");
  return v.get<int>();
}

std::uint64_t get_uint(const json& j, const std::string& key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw InputError("key '" + key + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw InputError("key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw InputError("key '" + key + "' must be a string");
  return v.get<std::string>();
}

json to_json(const LogicalProblem& problem) {
  json terms = json::array();
  for (const auto& t : problem.terms) terms.push_back({{"support", t.support}, {"coupling", t.coupling}});
  return {{"num_logical", problem.num_logical}, {"terms", terms}};
}

LogicalProblem problem_from_json(const json& j) {
  LogicalProblem p;
  p.num_logical = as<int>(require(j, "num_logical"), "num_logical");
  const json& terms = require(j, "terms");
  if (!terms.is_array()) throw InputError("'terms' must be an array");
  for (const auto& t : terms) {
    LogicalTerm term;
    term.support = as<std::vector<int>>(require(t, "support"), "support");
    term.coupling = get_number(t, "coupling");
    p.terms.push_back(std::move(term));
  }
  p.validate();
  return p;
}

json to_json(const ParityLayout& layout) {
  json qubits = json::array();
  for (const auto& q : layout.qubits) {
    qubits.push_back({{"id", q.id},
                      {"row", q.row},
                      {"col", q.col},
                      {"logical_support", q.logical_support},
                      {"local_field", q.local_field}});
  }
  json plaquettes = json::array();
  for (const auto& p : layout.plaquettes) plaquettes.push_back({{"members", p.members}});
  return {{"grid_rows", layout.grid_rows},
          {"grid_cols", layout.grid_cols},
          {"qubits", qubits},
          {"plaquettes", plaquettes},
          {"penalty_strength", layout.penalty_strength}};
}

ParityLayout layout_from_json(const json& j) {
  ParityLayout l;
  l.grid_rows = as<int>(require(j, "grid_rows"), "grid_rows");
  l.grid_cols = as<int>(require(j, "grid_cols"), "grid_cols");
  for (const auto& q : require(j, "qubits")) {
    ParityQubit pq;
    pq.id = as<int>(require(q, "id"), "id");
    pq.row = as<int>(require(q, "row"), "row");
    pq.col = as<int>(require(q, "col"), "col");
    pq.logical_support = as<std::vector<int>>(require(q, "logical_support"), "logical_support");
    pq.local_field = get_number(q, "local_field");
    l.qubits.push_back(std::move(pq));
  }
  for (const auto& p : require(j, "plaquettes"))
    l.plaquettes.push_back({as<std::vector<int>>(require(p, "members"), "members")});
  l.penalty_strength = get_number(j, "penalty_strength", 0.0);
  if (l.penalty_strength <= 0.0) l.penalty_strength = l.default_penalty();
  return l;
}

json to_json(LaserPoint point) { return {{"rabi", point.rabi}, {"detuning", point.detuning}}; }

LaserPoint point_from_json(const json& j) {
  return {get_number(j, "rabi"), get_number(j, "detuning")};
}

json to_json(const AdiabaticPath& path) {
  json interior = json::array();
  for (const auto& p : path.interior()) interior.push_back(to_json(p));
  json out = {{"start", to_json(path.start())},
              {"end", to_json(path.end())},
              {"interior", interior},
              {"tracked", path.tracked},
              {"sectors", path.sectors}};
  if (path.has_schedule()) {
    out["exponent"] = path.exponent();
    out["schedule_s"] = path.schedule_s();
    out["schedule_theta"] = path.schedule_theta();
  }
  return out;
}

AdiabaticPath path_from_json(const json& j) {
  std::vector<LaserPoint> interior;
  if (j.contains("interior"))
    for (const auto& p : j.at("interior")) interior.push_back(point_from_json(p));
  AdiabaticPath path(point_from_json(require(j, "start")), point_from_json(require(j, "end")),
                     interior);
  if (j.contains("tracked")) path.tracked = as<std::array<int, 5>>(j.at("tracked"), "tracked");
  if (j.contains("sectors")) path.sectors = as<std::vector<int>>(j.at("sectors"), "sectors");
  if (j.contains("schedule_s")) {
    path.set_schedule(as<std::vector<double>>(j.at("schedule_s"), "schedule_s"),
                      as<std::vector<double>>(require(j, "schedule_theta"), "schedule_theta"),
                      get_number(j, "exponent", 0.0));
  }
  return path;
}

json to_json(const RampReport& r) {
  return {{"sectors", r.sectors},         {"fidelity", r.fidelity},
          {"min_gap", r.min_gap},         {"duration_us", r.duration},
          {"epsilon", r.epsilon},         {"upper_bound_us", r.bound},
          {"degenerate", r.degenerate}};
}

json to_json(const PiecewisePulse& pulse) {
  json segs = json::array();
  for (const auto& seg : pulse.segments()) {
    if (const auto* r = std::get_if<RampSegment>(&seg)) {
      segs.push_back({{"kind", "ramp"}, {"duration_us", r->duration}, {"path", to_json(r->path)}});
    } else {
      const auto& h = std::get<HoldSegment>(seg);
      segs.push_back({{"kind", "hold"}, {"duration_us", h.duration}, {"point", to_json(h.point)}});
    }
  }
  return {{"duration_us", pulse.duration()}, {"segments", segs}};
}

PiecewisePulse pulse_from_json(const json& j) {
  std::vector<PulseSegment> segs;
  for (const auto& s : require(j, "segments")) {
    const std::string kind = get_string(s, "kind", "");
    const double d = get_number(s, "duration_us");
    if (kind == "ramp") {
      segs.emplace_back(RampSegment{path_from_json(require(s, "path")), d});
    } else if (kind == "hold") {
      segs.emplace_back(HoldSegment{point_from_json(require(s, "point")), d});
    } else {
      throw InputError("segment kind must be 'ramp' or 'hold'");
    }
  }
  return PiecewisePulse(std::move(segs));
}

json to_json(const Waypoints& w) {
  return {{"detuning_start", w.detuning_start}, {"rabi_a", w.rabi_a},
          {"detuning_a", w.detuning_a},         {"rabi_b", w.rabi_b},
          {"detuning_b", w.detuning_b},         {"detuning_end", w.detuning_end}};
}

Waypoints waypoints_from_json(const json& j) {
  return {get_number(j, "detuning_start"), get_number(j, "rabi_a"),
          get_number(j, "detuning_a"),     get_number(j, "rabi_b"),
          get_number(j, "detuning_b"),     get_number(j, "detuning_end")};
}

json to_json(const GateBox& b) {
  return {{"rabi_max", b.rabi_max},
          {"edge_detuning_min", b.edge_detuning_min},
          {"edge_detuning_max", b.edge_detuning_max},
          {"hold_detuning_min", b.hold_detuning_min},
          {"hold_detuning_max", b.hold_detuning_max},
          {"margin", b.margin}};
}

GateBox box_from_json(const json& j) {
  GateBox b;
  b.rabi_max = get_number(j, "rabi_max");
  b.edge_detuning_min = get_number(j, "edge_detuning_min");
  b.edge_detuning_max = get_number(j, "edge_detuning_max");
  b.hold_detuning_min = get_number(j, "hold_detuning_min");
  b.hold_detuning_max = get_number(j, "hold_detuning_max");
  b.margin = get_number(j, "margin", 1e-3);
  return b;
}

json to_json(const GateCalibration& cal) {
  json ramps = json::array();
  for (int v = 0; v < 3; ++v)
    ramps.push_back({{"duration_us", cal.tables.durations[v]}, {"path", to_json(cal.ramps[v])}});
  const PhaseTables& t = cal.tables;
  json tables = {{"ramp_phase", t.ramp_phase},
                 {"sign_phase", t.sign_phase},
                 {"ramp_a", t.ramp_a},
                 {"ramp_b", t.ramp_b},
                 {"energy_a", t.energy_a},
                 {"energy_b", t.energy_b},
                 {"index_a", t.index_a},
                 {"index_b", t.index_b}};
  return {{"interaction", cal.config.interaction},
          {"epsilon", cal.epsilon},
          {"waypoints", to_json(cal.waypoints)},
          {"box", to_json(cal.box)},
          {"tracked", cal.tracked},
          {"interior", cal.interior},
          {"m_max", cal.m_max},
          {"grid", cal.grid},
          {"ramps", ramps},
          {"ramp_time_us", cal.ramp_time()},
          {"worst_hold_us", cal.worst_hold},
          {"worst_gate_us", cal.worst_gate},
          {"seed", cal.seed},
          {"budget", cal.budget},
          {"evaluations", cal.evaluations},
          {"phase_tables", tables}};
}

GateCalibration calibration_from_json(const json& j) {
  GateCalibration cal;
  cal.config.interaction = get_number(j, "interaction");
  cal.epsilon = get_number(j, "epsilon");
  cal.waypoints = waypoints_from_json(require(j, "waypoints"));
  cal.box = box_from_json(require(j, "box"));
  cal.tracked = as<std::array<int, 5>>(require(j, "tracked"), "tracked");
  cal.interior = get_int(j, "interior", 0);
  cal.m_max = get_int(j, "m_max", 8);
  cal.grid = get_int(j, "grid", 64);
  cal.seed = get_uint(j, "seed", 0);
  cal.budget = get_int(j, "budget", 0);
  cal.evaluations = get_int(j, "evaluations", 0);
  const json& ramps = require(j, "ramps");
  if (!ramps.is_array() || ramps.size() != 3) throw InputError("'ramps' must hold three ramps");
  std::array<RampSegment, 3> segs;
  for (int v = 0; v < 3; ++v) {
    segs[v] = {path_from_json(require(ramps[v], "path")), get_number(ramps[v], "duration_us")};
    cal.ramps[v] = segs[v].path;
  }
  cal.tables = compute_phase_tables(segs, cal.config);
  cal.worst_hold = get_number(j, "worst_hold_us");
  cal.worst_gate = 2.0 * (cal.ramp_time() + cal.worst_hold);
  return cal;
}

json to_json(const QuantumChannel& channel) {
  const auto n = channel.superop.rows();
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < n; ++r) {
    std::vector<double> rr(n), ii(n);
    for (Eigen::Index c = 0; c < n; ++c) {
      rr[c] = channel.superop(r, c).real();
      ii[c] = channel.superop(r, c).imag();
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"dimension", n},
          {"trace_preserving", channel.trace_preserving},
          {"provenance", channel.provenance},
          {"real", re},
          {"imag", im}};
}

QuantumChannel channel_from_json(const json& j) {
  QuantumChannel ch;
  const int n = get_int(j, "dimension", 256);
  const auto re = as<std::vector<std::vector<double>>>(require(j, "real"), "real");
  const auto im = as<std::vector<std::vector<double>>>(require(j, "imag"), "imag");
  if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
    throw InputError("channel matrix has the wrong number of rows");
  ch.superop.resize(n, n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(re[r].size()) != n || static_cast<int>(im[r].size()) != n)
      throw InputError("channel matrix row " + std::to_string(r) + " has the wrong length");
    for (int c = 0; c < n; ++c) ch.superop(r, c) = {re[r][c], im[r][c]};
  }
  ch.trace_preserving = get_bool(j, "trace_preserving", false);
  ch.provenance = get_string(j, "provenance", "");
  return ch;
}

json to_json(const QaoaParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}};
}

QaoaParams params_from_json(const json& j) {
  QaoaParams p;
  p.alpha = as<std::vector<double>>(require(j, "alpha"), "alpha");
  p.beta = as<std::vector<double>>(require(j, "beta"), "beta");
  p.gamma = as<std::vector<double>>(require(j, "gamma"), "gamma");
  p.validate();
  return p;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string RunManifest::digest() const {
  std::uint64_t h = fnv1a(command);
  h = fnv1a(std::string(1, '\0') + config_text, h);
  h = fnv1a(std::string(1, '\0') + std::to_string(seed), h);
  h = fnv1a(std::string(1, '\0') + version, h);
  return hex(h);
}

json RunManifest::to_json() const {
  return {{"command", command},       {"config_path", config_path}, {"seed", seed},
          {"output_dir", output_dir}, {"version", version},         {"digest", digest()},
          {"started", started},       {"wall_seconds", wall_seconds}};
}

std::string format_double(double value) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const RunManifest& m,
                     const std::vector<std::string>& columns, const std::string& units)
    : out_(out), columns_(columns.size()) {
  out_ << "# manifest " << m.digest() << " command=" << m.command << " seed=" << m.seed
       << " version=" << m.version << '\n';
  if (!units.empty()) out_ << "# units " << units << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::separator() {
  if (filled_ >= columns_) throw InputError("CSV row has more fields than the header");
  if (filled_++) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw InputError("CSV row has fewer fields than the header");
  out_ << '\n';
  filled_ = 0;
}

}  // namespace rydpar
