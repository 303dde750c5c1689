#include "lattice/log.hpp"

#include <cstdio>
#include <cstdlib>

namespace lattice::log {

static Level parse_threshold() {
  const char* raw = std::getenv("LATTICE_LOG");
  if (raw == nullptr) return Level::warn;
  std::string value(raw);
  if (value == "error") return Level::error;
  if (value == "warn") return Level::warn;
  if (value == "info") return Level::info;
  if (value == "debug") return Level::debug;
  return Level::warn;
}

Level threshold() {
  static const Level cached = parse_threshold();
  return cached;
}

void write(Level level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static const char* const names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], message.c_str());
}

}  // namespace lattice::log
