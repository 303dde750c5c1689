#pragma once

#include <stdexcept>
#include <string>

namespace lattice {

/// Malformed or inconsistent input data: bad CSV cells, schema violations,
/// out-of-range actuator codes, overlapping attack scripts, and the like.
/// Messages name the offending file/row/column where applicable.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: unknown keys where unexpected, unparsable values,
/// or argument combinations that cannot be satisfied.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal invariant violation (a bug or numeric breakdown such as NaN loss).
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lattice
