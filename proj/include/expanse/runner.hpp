#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "expanse/config.hpp"

namespace expanse::cli {

// exit codes: 0 completed/pass, 1 theorem-check failure, 2 configuration
// error, 3 estimator precondition failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitTheoremFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitPreconditionError = 3;

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed_override;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::filesystem::path> files;
  // batch summary fields
  std::string key_estimates;
  std::string margin;
  std::string verdict;
};

// Runs one experiment, writing CSV/JSON reports under out_dir. Throws
// config_error / structural_error / precondition_error; callers map those
// to exit codes 2 / 2 / 3.
RunResult run(const ExperimentConfig& config, const RunOptions& options);

// Runs every config (possibly in parallel), each into its own subdirectory,
// capturing per-row errors, and writes batch_summary.csv in config order.
// Returns the summary path.
std::filesystem::path batch(const std::vector<ExperimentConfig>& configs,
                            const std::filesystem::path& out_dir);

int exit_code_for_exception(const std::exception& e);

}  // namespace expanse::cli
