#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lattice {

enum class Label : std::uint8_t { Normal = 0, Attack = 1 };

struct SensorSpec {
  std::string name;
  double lo = 0.0;  ///< lower operating limit
  double hi = 1.0;  ///< upper operating limit, must satisfy hi > lo

  bool operator==(const SensorSpec&) const = default;
};

struct ActuatorSpec {
  std::string name;
  int cardinality = 2;  ///< discrete codes are 0 .. cardinality-1

  bool operator==(const ActuatorSpec&) const = default;
};

/// Static description of one plant: dimension names, sensor operating limits,
/// actuator code ranges, the sampling tick, and the sensor quantization depth
/// used when states are mapped to discrete automaton keys.
struct Schema {
  std::vector<SensorSpec> sensors;
  std::vector<ActuatorSpec> actuators;
  double tick_seconds = 1.0;
  int sensor_bins = 10;

  std::size_t dimensions() const { return sensors.size() + actuators.size(); }

  /// Length of an EncodedState: one slot per actuator code plus the
  /// [value, hi, lo] triple per sensor.
  std::size_t encoded_length() const;

  int sensor_index(const std::string& name) const;    ///< -1 when absent
  int actuator_index(const std::string& name) const;  ///< -1 when absent

  /// Throws ConfigError on duplicate names, hi <= lo, cardinality < 2,
  /// sensor_bins < 1, or tick_seconds <= 0.
  void validate() const;

  bool operator==(const Schema&) const = default;
};

/// One sampled plant state.
struct SystemState {
  double timestamp = 0.0;          ///< seconds since episode start
  std::vector<double> sensors;     ///< schema sensor order
  std::vector<int> actuators;      ///< schema actuator order, codes in range
};

/// A contiguous recording; labels are either absent or one per state.
struct Episode {
  std::vector<SystemState> states;
  std::vector<Label> labels;

  std::size_t size() const { return states.size(); }
  bool labeled() const { return !labels.empty(); }
};

/// Half-open index range [begin, end) of consecutive Attack-labeled samples.
struct AttackSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  bool operator==(const AttackSpan&) const = default;
};

/// Flat numeric embedding of a state: actuator one-hots first (schema order),
/// then one [value, hi, lo] triple per sensor.
using EncodedState = std::vector<double>;

/// Slice map for an EncodedState under a given schema.
struct EncodingLayout {
  struct Slice {
    std::size_t offset = 0;
    std::size_t length = 0;
  };
  std::vector<Slice> actuator_slices;  ///< schema actuator order
  std::vector<Slice> sensor_slices;    ///< schema sensor order, each length 3
  std::size_t total = 0;

  static EncodingLayout of(const Schema& schema);
};

/// Fixed-length look-back over the encoded series, ending at `end_index`.
struct WindowView {
  std::span<const EncodedState> encoded;
  std::size_t end_index = 0;
};

/// One-hot actuators + [value, hi, lo] sensor triples.
/// Throws DataError when an actuator code is outside its schema range.
EncodedState encode_state(const SystemState& state, const Schema& schema);

std::vector<EncodedState> encode_episode(const Episode& episode, const Schema& schema);

/// Inverse of encode_state: actuator codes from slice argmax (first index on
/// ties), sensor values from the value slot. The timestamp is not part of the
/// encoding and must be supplied.
SystemState decode_state(const EncodedState& encoded, const Schema& schema,
                         double timestamp = 0.0);

/// Quantization bin of a sensor value: floor(bins * (v - lo) / (hi - lo)),
/// clamped to [0, bins-1]. Pure in value and spec.
int sensor_bin(double value, const SensorSpec& spec, int bins);

/// Maximal runs of Attack labels, in order, non-overlapping.
std::vector<AttackSpan> extract_attack_spans(const std::vector<Label>& labels);

/// All full windows of `window_size` consecutive encoded states; the view
/// ending at index i exists for every i >= window_size - 1. window_size == 0
/// is a ConfigError.
std::vector<WindowView> windows(std::span<const EncodedState> series,
                                std::size_t window_size);

/// Structural checks for an in-memory episode against its schema: dimension
/// counts, actuator code ranges, strictly increasing timestamps, and label
/// count. Throws DataError naming the first offending sample.
void validate_episode(const Episode& episode, const Schema& schema);

}  // namespace lattice
