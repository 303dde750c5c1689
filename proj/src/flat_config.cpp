#include "lattice/flat_config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lattice/errors.hpp"

namespace lattice {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Strip a trailing '#' comment that is not inside a double-quoted string.
std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

}  // namespace

FlatConfig FlatConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

FlatConfig FlatConfig::parse_string(const std::string& text, const std::string& origin) {
  FlatConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (cfg.values_.count(key) != 0) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    cfg.values_.emplace(key, value);
    cfg.order_.push_back(key);
  }
  return cfg;
}

bool FlatConfig::has(const std::string& key) const { return values_.count(key) != 0; }

std::string FlatConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string FlatConfig::get_string(const std::string& key) const { return raw(key); }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? values_.at(key) : fallback;
}

double FlatConfig::get_double(const std::string& key) const {
  const std::string value = raw(key);
  errno = 0;
  char* end = nullptr;
  double parsed = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + value + "'");
  }
  return parsed;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long FlatConfig::get_int(const std::string& key) const {
  const std::string value = raw(key);
  errno = 0;
  char* end = nullptr;
  long long parsed = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + value + "'");
  }
  return parsed;
}

long long FlatConfig::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string value = values_.at(key);
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + value + "'");
}

std::vector<std::string> FlatConfig::get_list(const std::string& key) const {
  const std::string value = raw(key);
  std::vector<std::string> items;
  if (trim(value).empty()) return items;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = value.find(',', start);
    std::string item = trim(comma == std::string::npos ? value.substr(start)
                                                       : value.substr(start, comma - start));
    if (item.empty()) {
      throw ConfigError(origin_ + ": key '" + key + "' has an empty list item");
    }
    items.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

std::vector<std::string> FlatConfig::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> matched;
  for (const std::string& key : order_) {
    if (key.rfind(prefix, 0) == 0) matched.push_back(key);
  }
  return matched;
}

void FlatConfig::set(const std::string& key, const std::string& value) {
  if (values_.count(key) == 0) order_.push_back(key);
  values_[key] = value;
}

}  // namespace lattice
