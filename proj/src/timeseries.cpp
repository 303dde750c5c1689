#include "lattice/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lattice/errors.hpp"

namespace lattice {

std::size_t Schema::encoded_length() const {
  std::size_t total = 0;
  for (const ActuatorSpec& a : actuators) total += static_cast<std::size_t>(a.cardinality);
  total += 3 * sensors.size();
  return total;
}

int Schema::sensor_index(const std::string& name) const {
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    if (sensors[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Schema::actuator_index(const std::string& name) const {
  for (std::size_t i = 0; i < actuators.size(); ++i) {
    if (actuators[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void Schema::validate() const {
  if (sensors.empty() && actuators.empty()) {
    throw ConfigError("schema declares no dimensions");
  }
  std::set<std::string> names;
  for (const SensorSpec& s : sensors) {
    if (s.name.empty()) throw ConfigError("schema has an unnamed sensor");
    if (!names.insert(s.name).second) {
      throw ConfigError("schema has a duplicate dimension name: " + s.name);
    }
    if (!(s.hi > s.lo)) {
      throw ConfigError("sensor " + s.name + " has limits hi <= lo");
    }
  }
  for (const ActuatorSpec& a : actuators) {
    if (a.name.empty()) throw ConfigError("schema has an unnamed actuator");
    if (!names.insert(a.name).second) {
      throw ConfigError("schema has a duplicate dimension name: " + a.name);
    }
    if (a.cardinality < 2) {
      throw ConfigError("actuator " + a.name + " has cardinality < 2");
    }
  }
  if (sensor_bins < 1) throw ConfigError("schema sensor_bins must be >= 1");
  if (!(tick_seconds > 0.0)) throw ConfigError("schema tick_seconds must be > 0");
}

EncodingLayout EncodingLayout::of(const Schema& schema) {
  EncodingLayout layout;
  std::size_t offset = 0;
  for (const ActuatorSpec& a : schema.actuators) {
    layout.actuator_slices.push_back({offset, static_cast<std::size_t>(a.cardinality)});
    offset += static_cast<std::size_t>(a.cardinality);
  }
  for (std::size_t i = 0; i < schema.sensors.size(); ++i) {
    layout.sensor_slices.push_back({offset, 3});
    offset += 3;
  }
  layout.total = offset;
  return layout;
}

EncodedState encode_state(const SystemState& state, const Schema& schema) {
  if (state.sensors.size() != schema.sensors.size() ||
      state.actuators.size() != schema.actuators.size()) {
    throw DataError("state dimension count does not match schema");
  }
  EncodedState encoded(schema.encoded_length(), 0.0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < schema.actuators.size(); ++i) {
    const int card = schema.actuators[i].cardinality;
    const int code = state.actuators[i];
    if (code < 0 || code >= card) {
      throw DataError("actuator " + schema.actuators[i].name + " code " +
                      std::to_string(code) + " outside [0, " + std::to_string(card) + ")");
    }
    encoded[offset + static_cast<std::size_t>(code)] = 1.0;
    offset += static_cast<std::size_t>(card);
  }
  for (std::size_t i = 0; i < schema.sensors.size(); ++i) {
    encoded[offset] = state.sensors[i];
    encoded[offset + 1] = schema.sensors[i].hi;
    encoded[offset + 2] = schema.sensors[i].lo;
    offset += 3;
  }
  return encoded;
}

std::vector<EncodedState> encode_episode(const Episode& episode, const Schema& schema) {
  std::vector<EncodedState> encoded;
  encoded.reserve(episode.size());
  for (const SystemState& state : episode.states) {
    encoded.push_back(encode_state(state, schema));
  }
  return encoded;
}

SystemState decode_state(const EncodedState& encoded, const Schema& schema, double timestamp) {
  if (encoded.size() != schema.encoded_length()) {
    throw DataError("encoded state length " + std::to_string(encoded.size()) +
                    " does not match schema encoding length " +
                    std::to_string(schema.encoded_length()));
  }
  SystemState state;
  state.timestamp = timestamp;
  const EncodingLayout layout = EncodingLayout::of(schema);
  for (const EncodingLayout::Slice& slice : layout.actuator_slices) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < slice.length; ++k) {
      if (encoded[slice.offset + k] > encoded[slice.offset + best]) best = k;
    }
    state.actuators.push_back(static_cast<int>(best));
  }
  for (const EncodingLayout::Slice& slice : layout.sensor_slices) {
    state.sensors.push_back(encoded[slice.offset]);
  }
  return state;
}

int sensor_bin(double value, const SensorSpec& spec, int bins) {
  const double scaled = static_cast<double>(bins) * (value - spec.lo) / (spec.hi - spec.lo);
  int bin = static_cast<int>(std::floor(scaled));
  if (bin < 0) bin = 0;
  if (bin > bins - 1) bin = bins - 1;
  return bin;
}

std::vector<AttackSpan> extract_attack_spans(const std::vector<Label>& labels) {
  std::vector<AttackSpan> spans;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] == Label::Attack) {
      std::size_t begin = i;
      while (i < labels.size() && labels[i] == Label::Attack) ++i;
      spans.push_back({begin, i});
    } else {
      ++i;
    }
  }
  return spans;
}

std::vector<WindowView> windows(std::span<const EncodedState> series, std::size_t window_size) {
  if (window_size == 0) throw ConfigError("window_size must be >= 1");
  std::vector<WindowView> views;
  if (series.size() < window_size) return views;
  views.reserve(series.size() - window_size + 1);
  for (std::size_t end = window_size - 1; end < series.size(); ++end) {
    views.push_back({series.subspan(end - window_size + 1, window_size), end});
  }
  return views;
}

void validate_episode(const Episode& episode, const Schema& schema) {
  if (!episode.labels.empty() && episode.labels.size() != episode.states.size()) {
    throw DataError("label count " + std::to_string(episode.labels.size()) +
                    " does not match state count " + std::to_string(episode.states.size()));
  }
  for (std::size_t i = 0; i < episode.states.size(); ++i) {
    const SystemState& state = episode.states[i];
    if (state.sensors.size() != schema.sensors.size()) {
      throw DataError("sample " + std::to_string(i) + " has " +
                      std::to_string(state.sensors.size()) + " sensors, schema expects " +
                      std::to_string(schema.sensors.size()));
    }
    if (state.actuators.size() != schema.actuators.size()) {
      throw DataError("sample " + std::to_string(i) + " has " +
                      std::to_string(state.actuators.size()) + " actuators, schema expects " +
                      std::to_string(schema.actuators.size()));
    }
    for (std::size_t a = 0; a < state.actuators.size(); ++a) {
      const int card = schema.actuators[a].cardinality;
      if (state.actuators[a] < 0 || state.actuators[a] >= card) {
        throw DataError("sample " + std::to_string(i) + " actuator " +
                        schema.actuators[a].name + " code " +
                        std::to_string(state.actuators[a]) + " outside [0, " +
                        std::to_string(card) + ")");
      }
    }
    if (i > 0 && !(state.timestamp > episode.states[i - 1].timestamp)) {
      throw DataError("timestamps not strictly increasing at sample " + std::to_string(i));
    }
  }
}

}  // namespace lattice
