#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace teleop {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the TOML subset the launch profiles use into a JSON object:
/// [table] and [[array.of.tables]] headers, bare/quoted/dotted keys, basic
/// and literal strings, integers, floats, booleans, and (possibly
/// multi-line) arrays of those. No dates, inline tables or multi-line
/// strings. Throws ConfigError with the line number.
nlohmann::json parse_toml(std::string_view text);

}  // namespace teleop
