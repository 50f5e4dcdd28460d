#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace varid::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SHA-256 (hex) of the command name and the canonical dump of the effective config.
std::string config_hash(const std::string& command, const nlohmann::json& config);

/// varid <command> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace varid::cli
