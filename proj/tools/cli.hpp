// cli.hpp - command-line front end over the C API: argument parsing,
// subcommand dispatch and deterministic CSV/JSON emission.
#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coamp_cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNegative = 1,     // computed; infeasible / false
  kExitUsage = 2,        // invalid input
  kExitInconclusive = 3,
  kExitFailure = 4,      // numeric or I/O failure
};

enum class Format { Csv, Json };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> params;  // flag name (without --) -> raw text
  std::vector<std::string> grid;              // axis:min:max:steps
  std::optional<std::string> output;
  Format format = Format::Csv;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string payload;
  std::vector<std::string> warnings;
  std::string error;
};

const std::vector<std::string>& subcommands();

/// Throws UsageError for unknown flags, unknown config keys, missing
/// required parameters and malformed values.
RunConfig parse_args(const std::vector<std::string>& args);

RunResult dispatch(const RunConfig& config);

/// Writes the payload to `out` or atomically to config.output. Returns the
/// final exit code (kExitFailure when the file cannot be written).
int emit(const RunResult& result, const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + dispatch + emit; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coamp_cli
