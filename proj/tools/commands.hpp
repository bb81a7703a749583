#pragma once

// Subcommands of the vp1d tool. Each returns a process exit code and never
// throws; errors are reported on the given stream.

#include <filesystem>
#include <optional>
#include <ostream>

namespace vp1d::cli {

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kInvalidInput = 2,
  kNonConvergence = 3,
  kIoFailure = 4,
};

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  ///< overrides "out" in the config
  int threads = 0;                           ///< 0 keeps the OpenMP default
};

int cmd_run(const CommandOptions& options, std::ostream& log);
int cmd_verify(const CommandOptions& options, std::ostream& log);
int cmd_converge_study(const CommandOptions& options, std::ostream& log);
int cmd_extend(const CommandOptions& options, std::ostream& log);

}  // namespace vp1d::cli
