#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace minkflow {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 1,
  exit_max_steps = 2,
  exit_step_failure = 3,
  exit_verify_failed = 4,
};

struct CliArgs {
  std::string command;  ///< flow | lp-solve | verify
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_flow(const CliArgs& args, std::ostream& out, std::ostream& err);
int cmd_lp_solve(const CliArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const CliArgs& args, std::ostream& out, std::ostream& err);

/// Dispatches on args.command.
int run_command(const CliArgs& args, std::ostream& out, std::ostream& err);

}  // namespace minkflow
