#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace pin::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kBudgetPartial = 3, kDiagnostic = 4 };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::string config_path;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::optional<int> workers;         // overrides the config worker count
  std::optional<double> budget;       // overrides the config budget
};

/// Runs the configured experiment, writes its CSV files, the config copy and
/// manifest.txt into out_dir, and returns the process exit code.
int run(const RunConfig& config, const RunOptions& options, std::ostream& log);

}  // namespace pin::cli
