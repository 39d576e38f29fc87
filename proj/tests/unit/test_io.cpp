#include <gtest/gtest.h>

#include <sstream>

#include "rydpar/errors.hpp"
#include "rydpar/io.hpp"

using namespace rydpar;

TEST(Io, ParseErrorsCarryLineAndColumn) {
  try {
    parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json");
    FAIL() << "no error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.json:3:8"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_json_file("/nonexistent/x.json"), InputError);
}

TEST(Io, TypedGetters) {
  const json j = parse_json(R"({"x": 1.5, "n": 3, "s": "hi", "b": true, "bad": "1"})");
  EXPECT_EQ(get_number(j, "x"), 1.5);
  EXPECT_EQ(get_number(j, "missing", 2.0), 2.0);
  EXPECT_EQ(get_int(j, "n", 0), 3);
  EXPECT_EQ(get_uint(j, "n", 0), 3u);
  EXPECT_EQ(get_string(j, "s", ""), "hi");
  EXPECT_TRUE(get_bool(j, "b", false));
  EXPECT_THROW(get_number(j, "missing"), InputError);
  EXPECT_THROW(get_number(j, "bad"), InputError);
  EXPECT_THROW(get_int(j, "x", 0), InputError);
}

TEST(Io, LayoutRoundTrip) {
  const ParityLayout l = encode_complete_bipartite(2, 3, {{1, -2, 0.5}, {0.3, 0.2, -1}});
  const ParityLayout r = layout_from_json(parse_json(to_json(l).dump()));
  ASSERT_EQ(r.num_qubits(), l.num_qubits());
  EXPECT_EQ(r.penalty_strength, l.penalty_strength);
  for (int i = 0; i < l.num_qubits(); ++i) {
    EXPECT_EQ(r.qubits[i].logical_support, l.qubits[i].logical_support);
    EXPECT_EQ(r.qubits[i].local_field, l.qubits[i].local_field);
  }
  ASSERT_EQ(r.plaquettes.size(), l.plaquettes.size());
  for (std::size_t q = 0; q < l.plaquettes.size(); ++q)
    EXPECT_EQ(r.plaquettes[q].members, l.plaquettes[q].members);
}

TEST(Io, ProblemRoundTrip) {
  LogicalProblem p{3, {{{0, 2}, 1.25}, {{1, 2}, -0.5}}};
  const LogicalProblem r = problem_from_json(to_json(p));
  EXPECT_EQ(r.num_logical, 3);
  ASSERT_EQ(r.terms.size(), 2u);
  EXPECT_EQ(r.terms[1].support, (std::vector<int>{1, 2}));
  EXPECT_EQ(r.terms[0].coupling, 1.25);
}

TEST(Io, PulseRoundTripIsExact) {
  const PiecewisePulse p({linear_ramp({0.0, -100.0}, {50.0, -30.0}, 0.123456789012345678),
                          HoldSegment{{50.0, -30.0}, 0.1 / 3.0},
                          linear_ramp({50.0, -30.0}, {0.0, -100.0}, 0.2)});
  const PiecewisePulse r = pulse_from_json(parse_json(to_json(p).dump()));
  EXPECT_EQ(r, p);
}

TEST(Io, CalibrationFixtureRoundTrip) {
  const GateCalibration cal = calibration_from_json(read_json_file(RYDPAR_FIXTURE_DIR "/calibration.json"));
  const GateCalibration r = calibration_from_json(parse_json(to_json(cal).dump()));
  EXPECT_EQ(r.waypoints, cal.waypoints);
  EXPECT_EQ(r.ramps, cal.ramps);
  EXPECT_EQ(r.worst_gate, cal.worst_gate);
  EXPECT_EQ(r.tables.ramp_a, cal.tables.ramp_a);
  EXPECT_EQ(r.tables.de_b_at_a, cal.tables.de_b_at_a);
}

TEST(Io, ChannelAndParamsRoundTrip) {
  QuantumChannel c = depolarizing_channel();
  c.superop(3, 7) = {0.25, -0.125};
  const QuantumChannel r = channel_from_json(to_json(c));
  EXPECT_EQ(r.superop, c.superop);
  EXPECT_EQ(r.trace_preserving, c.trace_preserving);
  QaoaParams p = QaoaParams::zeros(2);
  p.gamma[1] = 0.1;
  EXPECT_EQ(params_from_json(to_json(p)), p);
}

TEST(Io, ManifestDigestCoversInputsOnly) {
  RunManifest a;
  a.command = "qaoa";
  a.config_text = "{\"k\":1}";
  a.seed = 5;
  RunManifest b = a;
  b.started = "2020-01-01T00:00:00Z";
  b.wall_seconds = 12.0;
  b.output_dir = "/elsewhere";
  EXPECT_EQ(a.digest(), b.digest());
  b.seed = 6;
  EXPECT_NE(a.digest(), b.digest());
  b = a;
  b.config_text = "{\"k\":2}";
  EXPECT_NE(a.digest(), b.digest());
  EXPECT_EQ(a.to_json().at("digest"), a.digest());
}

TEST(Io, CsvRowsAreChecked) {
  RunManifest m;
  m.command = "spectrum";
  m.seed = 1;
  std::ostringstream out;
  CsvWriter w(out, m, {"a", "b", "c"});
  w << 0.1 << 2 << std::string("x");
  w.end_row();
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# manifest " + m.digest(), 0), 0u);
  EXPECT_NE(text.find("\na,b,c\n0.10000000000000001,2,x\n"), std::string::npos) << text;
  w << 1.0;
  EXPECT_THROW(w.end_row(), InputError);
  w << 1.0 << 2.0;
  EXPECT_THROW(w << 3.0, InputError);
}

TEST(Io, DoublesRoundTripThroughText) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
