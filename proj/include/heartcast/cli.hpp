#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace heartcast {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitIo = 2,
  kExitValidation = 3,
  kExitInsufficientData = 4,
};

enum class EmitFormat { json, csv_bundle };

struct RunConfig {
  std::string scenario_path;
  std::string output_path;  // file for json, directory for csv-bundle
  EmitFormat emit = EmitFormat::json;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> mc_suitors;
  std::optional<std::size_t> mc_realizations;
  int verbosity = 0;
};

/// Runs a scenario file to a report on disk and returns the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// `heartcast forecast --scenario <file> --out <path> [--emit json|csv-bundle]
///  [--seed N] [--mc-suitors N] [--mc-realizations N] [-v]`
int execute(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace heartcast
