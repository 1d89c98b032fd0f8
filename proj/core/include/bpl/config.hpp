#pragma once

// Run configuration files: `key = value` lines, `#` comments, dotted keys.
// A key may be given by its last component when that is unambiguous
// (`gamma` for `learner.gamma`).

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bpl/harness.hpp"

namespace bpl {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ConfigKey {
  std::string name;
  std::string type;  // int, real, string, list
  std::string description;
};

const std::vector<ConfigKey>& config_keys();

// Raw key/value settings after alias resolution; later assignments win.
using ConfigValues = std::map<std::string, std::string, std::less<>>;

// Throws ConfigError on unknown keys or malformed lines.
ConfigValues parse_config_text(std::string_view text);
ConfigValues parse_config_file(const std::string& path);
// "key=value" strings.
void apply_overrides(ConfigValues& values, const std::vector<std::string>& overrides);

// Expands envs x approaches x seeds into resolved configs. Environment
// defaults fill any key the values leave unset. Throws ConfigError with the
// key path on type or range violations.
std::vector<RunConfig> expand_configs(const ConfigValues& values);

std::vector<RunConfig> parse_config(const std::string& path, const std::vector<std::string>& overrides);

// Reads back a config echo.
RunConfig config_from_echo(std::string_view echo);

}  // namespace bpl
