#include "json_util.hpp"

#include <fstream>

#include "lattice/errors.hpp"

namespace lattice::detail {

using nlohmann::ordered_json;

ordered_json schema_to_json(const Schema& schema) {
  ordered_json j;
  j["tick_seconds"] = schema.tick_seconds;
  j["sensor_bins"] = schema.sensor_bins;
  j["sensors"] = ordered_json::array();
  for (const SensorSpec& s : schema.sensors) {
    j["sensors"].push_back({{"name", s.name}, {"lo", s.lo}, {"hi", s.hi}});
  }
  j["actuators"] = ordered_json::array();
  for (const ActuatorSpec& a : schema.actuators) {
    j["actuators"].push_back({{"name", a.name}, {"cardinality", a.cardinality}});
  }
  return j;
}

Schema schema_from_json(const ordered_json& j) {
  Schema schema;
  schema.tick_seconds = j.at("tick_seconds").get<double>();
  schema.sensor_bins = j.at("sensor_bins").get<int>();
  for (const auto& s : j.at("sensors")) {
    schema.sensors.push_back(
        {s.at("name").get<std::string>(), s.at("lo").get<double>(), s.at("hi").get<double>()});
  }
  for (const auto& a : j.at("actuators")) {
    schema.actuators.push_back({a.at("name").get<std::string>(), a.at("cardinality").get<int>()});
  }
  schema.validate();
  return schema;
}

void write_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed while writing '" + path + "'");
}

ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    ordered_json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace lattice::detail
