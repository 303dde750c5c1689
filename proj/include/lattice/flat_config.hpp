#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lattice {

/// Flat TOML-style key-value document.
///
/// Grammar, one entry per line:
///   key = value          # trailing comment
/// Keys may contain dots for grouping (e.g. "limits.LIT101"); there are no
/// nested tables. Values are bare scalars or double-quoted strings; quoted
/// strings may hold comma-separated lists. '#' starts a comment outside
/// quotes. Duplicate keys are an error.
class FlatConfig {
 public:
  FlatConfig() = default;

  static FlatConfig parse_file(const std::string& path);
  static FlatConfig parse_string(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;

  /// Typed getters. The no-default overloads throw ConfigError when the key
  /// is missing; all throw ConfigError when the value does not parse.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Comma-separated list inside a quoted value; items are trimmed.
  /// An empty string yields an empty list.
  std::vector<std::string> get_list(const std::string& key) const;

  /// Keys beginning with `prefix`, in document order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  /// All keys in document order (used to reject unknown keys and to
  /// re-serialize configuration snapshots deterministically).
  const std::vector<std::string>& keys() const { return order_; }

  void set(const std::string& key, const std::string& value);
  const std::string& origin() const { return origin_; }

 private:
  std::string raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  std::string origin_ = "<memory>";
};

}  // namespace lattice
