#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace ragwatt::toml {

/// Parses a TOML subset into JSON: [table] / [[array-of-table]] headers with
/// dotted paths, `key = value` pairs (bare, quoted or dotted keys), basic and
/// literal strings, integers, floats, booleans and (possibly multi-line)
/// arrays, with # comments. Inline tables and dates are not supported.
/// Raises ConfigError with a line number on malformed input.
nlohmann::json parse(std::string_view text);

nlohmann::json parse_file(const std::string& path);

}  // namespace ragwatt::toml
