#pragma once

#include <string>

#include "lattice/timeseries.hpp"

namespace lattice {

/// Shortest round-trip decimal rendering of a double (std::to_chars).
std::string format_double(double value);

/// Load a recording from CSV.
///
/// The header row must contain `timestamp`, every schema dimension name (any
/// column order), and optionally `label`. Timestamps are either numeric
/// seconds or ISO-8601 date-times ("YYYY-MM-DD HH:MM:SS[.frac]", 'T'
/// separator allowed, or bare "HH:MM:SS[.frac]"); the format is auto-detected
/// from the first data row and must stay uniform. ISO timestamps are
/// normalized to seconds since the first row. Labels are `0`/`Normal` or
/// `1`/`Attack`. Malformed input raises DataError naming the row and column.
Episode load_csv(const std::string& path, const Schema& schema);

/// Write an episode as CSV (timestamp, sensors, actuators, optional label)
/// using shortest round-trip number formatting.
void save_csv(const std::string& path, const Episode& episode, const Schema& schema);

/// Plant schema as a flat TOML-style document:
///   tick_seconds = 1.0
///   sensor_bins = 10
///   sensors = "LIT101,FIT101"
///   actuators = "MV101,P101,P102"
///   limits.LIT101 = "0.0,1200.0"      # lo,hi per sensor
///   cardinality.MV101 = 3             # per actuator
/// Unknown keys are rejected.
Schema load_schema(const std::string& path);
void save_schema(const std::string& path, const Schema& schema);

}  // namespace lattice
