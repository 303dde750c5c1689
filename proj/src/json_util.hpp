#pragma once

#include <string>

#include "json.hpp"
#include "lattice/timeseries.hpp"

namespace lattice::detail {

nlohmann::ordered_json schema_to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::ordered_json& j);

/// Serialize `j` to `path` with two-space indentation and a trailing newline.
/// Throws IoError when the file cannot be written.
void write_json_file(const std::string& path, const nlohmann::ordered_json& j);

/// Parse the JSON document at `path`. Throws IoError when unreadable,
/// DataError when the content is not valid JSON.
nlohmann::ordered_json read_json_file(const std::string& path);

}  // namespace lattice::detail
