#pragma once

// JSON scenario files. Unknown fields are rejected so that typos never fall
// back silently to defaults; see docs/config.md for the schema.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cdc/model.hpp"

namespace cdc {

/// Malformed JSON or a field of the wrong shape. Semantic checks are left to
/// validate().
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Serializes every field; parse_config(dump_config(c)) == c.
std::string dump_config(const ScenarioConfig& config);

}  // namespace cdc
