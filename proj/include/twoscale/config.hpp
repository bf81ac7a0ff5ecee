#pragma once

#include <string>

#include "twoscale/driver.hpp"

namespace twoscale {

/// Parses the flat key=value run description.  '#' starts a comment, blank
/// lines are skipped, unknown or duplicate keys raise ConfigError with the
/// offending line number.  The parsed config is validated before it is
/// returned.
RunConfig parse_config_text(const std::string& text);

/// Same, reading from a file; raises ConfigError when the file is unreadable.
RunConfig parse_config(const std::string& path);

/// Emits a config in the format parse_config_text accepts; round-trips every
/// field.
std::string serialize_config(const RunConfig& config);

}  // namespace twoscale
