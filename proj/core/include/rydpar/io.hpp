#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rydpar/encoding.hpp"
#include "rydpar/open_system.hpp"
#include "rydpar/qaoa.hpp"
#include "rydpar/ramps.hpp"
#include "rydpar/two_pause.hpp"

namespace rydpar {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// Parse failures become InputError with line:column of the offending byte.
json parse_json(const std::string& text, const std::string& origin = "<string>");
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

json to_json(const LogicalProblem& problem);
LogicalProblem problem_from_json(const json& j);

json to_json(const ParityLayout& layout);
ParityLayout layout_from_json(const json& j);

json to_json(LaserPoint point);
LaserPoint point_from_json(const json& j);

json to_json(const AdiabaticPath& path);
AdiabaticPath path_from_json(const json& j);

json to_json(const RampReport& report);
json to_json(const PiecewisePulse& pulse);
PiecewisePulse pulse_from_json(const json& j);

json to_json(const Waypoints& w);
Waypoints waypoints_from_json(const json& j);
json to_json(const GateBox& box);
GateBox box_from_json(const json& j);

// Phase tables are written for inspection and recomputed on load.
json to_json(const GateCalibration& cal);
GateCalibration calibration_from_json(const json& j);

json to_json(const QuantumChannel& channel);
QuantumChannel channel_from_json(const json& j);

json to_json(const QaoaParams& params);
QaoaParams params_from_json(const json& j);

// Typed lookups that name the missing or mistyped key.
double get_number(const json& j, const std::string& key);
double get_number(const json& j, const std::string& key, double fallback);
int get_int(const json& j, const std::string& key, int fallback);
std::uint64_t get_uint(const json& j, const std::string& key, std::uint64_t fallback);
bool get_bool(const json& j, const std::string& key, bool fallback);
std::string get_string(const json& j, const std::string& key, const std::string& fallback);

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);

// Identity of a run. The digest covers everything that determines the
// outputs; wall-clock data lives only in the sidecar manifest.json.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_text;  // canonical dump of the effective configuration
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string version = kVersion;
  std::string started;  // ISO-8601 UTC
  double wall_seconds = 0.0;

  std::string digest() const;
  json to_json() const;
};

// Doubles are written with 17 significant digits so files round-trip.
class CsvWriter {
 public:
  // `units`, when given, becomes a second comment line.
  CsvWriter(std::ostream& out, const RunManifest& manifest,
            const std::vector<std::string>& columns, const std::string& units = "");

  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(std::int64_t value);
  CsvWriter& operator<<(int value) { return *this << static_cast<std::int64_t>(value); }
  CsvWriter& operator<<(const std::string& value);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_ = 0;
  std::size_t filled_ = 0;
};

std::string format_double(double value);

}  // namespace rydpar
