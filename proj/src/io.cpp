#include "lattice/io.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "lattice/errors.hpp"
#include "lattice/flat_config.hpp"

namespace lattice {

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw InternalError("number formatting failed");
  return std::string(buffer, ptr);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    cells.push_back(trim(comma == std::string::npos ? line.substr(start)
                                                    : line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_full_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size() && errno != ERANGE;
}

bool parse_full_int(const std::string& cell, long long& out) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtoll(cell.c_str(), &end, 10);
  return end == cell.c_str() + cell.size() && errno != ERANGE;
}

/// Days since 1970-01-01 of a proleptic Gregorian civil date.
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

bool two_digits(const std::string& s, std::size_t at, int& out) {
  if (at + 1 >= s.size()) return false;
  if (!std::isdigit(static_cast<unsigned char>(s[at])) ||
      !std::isdigit(static_cast<unsigned char>(s[at + 1]))) {
    return false;
  }
  out = (s[at] - '0') * 10 + (s[at + 1] - '0');
  return true;
}

/// Parse "HH:MM:SS[.frac]" starting at `at`, consuming the rest of the string.
bool parse_time_of_day(const std::string& s, std::size_t at, double& seconds_out) {
  int hh = 0;
  int mm = 0;
  if (!two_digits(s, at, hh) || at + 2 >= s.size() || s[at + 2] != ':') return false;
  if (!two_digits(s, at + 3, mm) || at + 5 >= s.size() || s[at + 5] != ':') return false;
  const std::string sec_part = s.substr(at + 6);
  double sec = 0.0;
  if (sec_part.empty() || !std::isdigit(static_cast<unsigned char>(sec_part[0])) ||
      !parse_full_double(sec_part, sec)) {
    return false;
  }
  if (hh > 23 || mm > 59 || sec >= 61.0) return false;
  seconds_out = hh * 3600.0 + mm * 60.0 + sec;
  return true;
}

/// Absolute seconds of an ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS[.frac]" date-time
/// or bare "HH:MM:SS[.frac]" (taken as an offset on day zero).
std::optional<double> parse_iso_timestamp(const std::string& s) {
  double tod = 0.0;
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
    int month = 0;
    int day = 0;
    const std::string year_part = s.substr(0, 4);
    long long year = 0;
    if (!parse_full_int(year_part, year)) return std::nullopt;
    if (!two_digits(s, 5, month) || !two_digits(s, 8, day)) return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
    if (s.size() < 11 || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
    if (!parse_time_of_day(s, 11, tod)) return std::nullopt;
    return static_cast<double>(days_from_civil(year, static_cast<unsigned>(month),
                                               static_cast<unsigned>(day))) *
               86400.0 +
           tod;
  }
  if (parse_time_of_day(s, 0, tod)) return tod;
  return std::nullopt;
}

[[noreturn]] void cell_error(const std::string& path, std::size_t line, const std::string& column,
                             const std::string& what) {
  throw DataError(path + ": row " + std::to_string(line) + ", column '" + column + "': " + what);
}

}  // namespace

Episode load_csv(const std::string& path, const Schema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_row(line);
  int ts_col = -1;
  int label_col = -1;
  std::vector<int> sensor_cols(schema.sensors.size(), -1);
  std::vector<int> actuator_cols(schema.actuators.size(), -1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    int claimed = 0;
    if (name == "timestamp") {
      if (ts_col >= 0) throw DataError(path + ": duplicate 'timestamp' column");
      ts_col = static_cast<int>(c);
      claimed = 1;
    } else if (name == "label") {
      if (label_col >= 0) throw DataError(path + ": duplicate 'label' column");
      label_col = static_cast<int>(c);
      claimed = 1;
    } else {
      const int si = schema.sensor_index(name);
      const int ai = schema.actuator_index(name);
      if (si >= 0) {
        if (sensor_cols[si] >= 0) throw DataError(path + ": duplicate column '" + name + "'");
        sensor_cols[si] = static_cast<int>(c);
        claimed = 1;
      } else if (ai >= 0) {
        if (actuator_cols[ai] >= 0) throw DataError(path + ": duplicate column '" + name + "'");
        actuator_cols[ai] = static_cast<int>(c);
        claimed = 1;
      }
    }
    if (claimed == 0) {
      throw DataError(path + ": column '" + name + "' is not in the schema");
    }
  }
  if (ts_col < 0) throw DataError(path + ": missing 'timestamp' column");
  for (std::size_t i = 0; i < schema.sensors.size(); ++i) {
    if (sensor_cols[i] < 0) {
      throw DataError(path + ": missing sensor column '" + schema.sensors[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < schema.actuators.size(); ++i) {
    if (actuator_cols[i] < 0) {
      throw DataError(path + ": missing actuator column '" + schema.actuators[i].name + "'");
    }
  }

  Episode episode;
  enum class TsMode { undecided, numeric, iso };
  TsMode mode = TsMode::undecided;
  double iso_base = 0.0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ": row " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    }

    SystemState state;
    const std::string& ts_cell = cells[static_cast<std::size_t>(ts_col)];
    double numeric_ts = 0.0;
    if (mode == TsMode::undecided) {
      if (parse_full_double(ts_cell, numeric_ts)) {
        mode = TsMode::numeric;
      } else if (parse_iso_timestamp(ts_cell)) {
        mode = TsMode::iso;
      } else {
        cell_error(path, lineno, "timestamp", "unparseable timestamp '" + ts_cell + "'");
      }
    }
    if (mode == TsMode::numeric) {
      if (!parse_full_double(ts_cell, numeric_ts)) {
        cell_error(path, lineno, "timestamp", "expected numeric timestamp, got '" + ts_cell + "'");
      }
      state.timestamp = numeric_ts;
    } else {
      const std::optional<double> abs = parse_iso_timestamp(ts_cell);
      if (!abs) {
        cell_error(path, lineno, "timestamp", "expected ISO-8601 timestamp, got '" + ts_cell + "'");
      }
      if (episode.states.empty()) iso_base = *abs;
      state.timestamp = *abs - iso_base;
    }
    if (!episode.states.empty() && !(state.timestamp > episode.states.back().timestamp)) {
      cell_error(path, lineno, "timestamp", "timestamps must be strictly increasing");
    }

    state.sensors.resize(schema.sensors.size());
    for (std::size_t i = 0; i < schema.sensors.size(); ++i) {
      const std::string& cell = cells[static_cast<std::size_t>(sensor_cols[i])];
      if (!parse_full_double(cell, state.sensors[i])) {
        cell_error(path, lineno, schema.sensors[i].name, "unparseable number '" + cell + "'");
      }
    }
    state.actuators.resize(schema.actuators.size());
    for (std::size_t i = 0; i < schema.actuators.size(); ++i) {
      const std::string& cell = cells[static_cast<std::size_t>(actuator_cols[i])];
      long long code = 0;
      if (!parse_full_int(cell, code)) {
        cell_error(path, lineno, schema.actuators[i].name, "unparseable code '" + cell + "'");
      }
      if (code < 0 || code >= schema.actuators[i].cardinality) {
        cell_error(path, lineno, schema.actuators[i].name,
                   "code " + cell + " outside [0, " +
                       std::to_string(schema.actuators[i].cardinality) + ")");
      }
      state.actuators[i] = static_cast<int>(code);
    }
    if (label_col >= 0) {
      const std::string& cell = cells[static_cast<std::size_t>(label_col)];
      if (cell == "0" || cell == "Normal") {
        episode.labels.push_back(Label::Normal);
      } else if (cell == "1" || cell == "Attack") {
        episode.labels.push_back(Label::Attack);
      } else {
        cell_error(path, lineno, "label", "expected 0/Normal or 1/Attack, got '" + cell + "'");
      }
    }
    episode.states.push_back(std::move(state));
  }
  return episode;
}

void save_csv(const std::string& path, const Episode& episode, const Schema& schema) {
  if (episode.labeled() && episode.labels.size() != episode.states.size()) {
    throw DataError("label count does not match state count");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write data file: " + path);
  out << "timestamp";
  for (const SensorSpec& s : schema.sensors) out << ',' << s.name;
  for (const ActuatorSpec& a : schema.actuators) out << ',' << a.name;
  if (episode.labeled()) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < episode.states.size(); ++i) {
    const SystemState& state = episode.states[i];
    out << format_double(state.timestamp);
    for (double v : state.sensors) out << ',' << format_double(v);
    for (int code : state.actuators) out << ',' << code;
    if (episode.labeled()) out << ',' << (episode.labels[i] == Label::Attack ? '1' : '0');
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Schema load_schema(const std::string& path) {
  const FlatConfig cfg = FlatConfig::parse_file(path);
  Schema schema;
  schema.tick_seconds = cfg.get_double("tick_seconds", 1.0);
  schema.sensor_bins = static_cast<int>(cfg.get_int("sensor_bins", 10));

  std::set<std::string> known = {"tick_seconds", "sensor_bins", "sensors", "actuators"};
  for (const std::string& name : cfg.get_list("sensors")) {
    SensorSpec spec;
    spec.name = name;
    const std::string key = "limits." + name;
    const std::vector<std::string> parts = cfg.get_list(key);
    if (parts.size() != 2) {
      throw ConfigError(path + ": key '" + key + "' must be \"lo,hi\"");
    }
    double lo = 0.0;
    double hi = 0.0;
    if (!parse_full_double(parts[0], lo) || !parse_full_double(parts[1], hi)) {
      throw ConfigError(path + ": key '" + key + "' must hold two numbers");
    }
    spec.lo = lo;
    spec.hi = hi;
    known.insert(key);
    schema.sensors.push_back(spec);
  }
  for (const std::string& name : cfg.get_list("actuators")) {
    ActuatorSpec spec;
    spec.name = name;
    const std::string key = "cardinality." + name;
    spec.cardinality = static_cast<int>(cfg.get_int(key));
    known.insert(key);
    schema.actuators.push_back(spec);
  }
  for (const std::string& key : cfg.keys()) {
    if (known.count(key) == 0) {
      throw ConfigError(path + ": unknown schema key '" + key + "'");
    }
  }
  schema.validate();
  return schema;
}

void save_schema(const std::string& path, const Schema& schema) {
  schema.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write schema file: " + path);
  out << "tick_seconds = " << format_double(schema.tick_seconds) << '\n';
  out << "sensor_bins = " << schema.sensor_bins << '\n';
  out << "sensors = \"";
  for (std::size_t i = 0; i < schema.sensors.size(); ++i) {
    if (i > 0) out << ',';
    out << schema.sensors[i].name;
  }
  out << "\"\n";
  out << "actuators = \"";
  for (std::size_t i = 0; i < schema.actuators.size(); ++i) {
    if (i > 0) out << ',';
    out << schema.actuators[i].name;
  }
  out << "\"\n";
  for (const SensorSpec& s : schema.sensors) {
    out << "limits." << s.name << " = \"" << format_double(s.lo) << ',' << format_double(s.hi)
        << "\"\n";
  }
  for (const ActuatorSpec& a : schema.actuators) {
    out << "cardinality." << a.name << " = " << a.cardinality << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace lattice
