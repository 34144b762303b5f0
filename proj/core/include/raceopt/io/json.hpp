#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace raceopt::io {

using Json = nlohmann::json;

/// Canonical text: sorted keys, two-space indentation, floats with 17
/// significant digits, arrays of scalars on one line, trailing newline.
/// Non-finite floats are written as null.
std::string canonical_dump(const Json& j);

/// Parses text, throwing Error(io_error) with the parser message on failure.
Json parse_json(const std::string& text, const std::string& what);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace raceopt::io
