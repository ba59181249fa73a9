#pragma once
// Command-line front end for the kgnf tool.

#include "kgnf/config.hpp"
#include "kgnf/experiments.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace kgnf {

/// Exit codes.
enum ExitCode : int { kExitPass = 0, kExitGateFail = 1, kExitConfig = 2, kExitFailure = 3 };

const std::vector<std::string>& subcommands();

/// Run the experiment named by cfg.command.
SweepReport run_experiment(const RunConfig& cfg);

/// Run, write outputs under cfg.out (if set), print the JSON summary to `out`
/// and return 0 iff every gate passed. Failures print a JSON error record.
int dispatch(const RunConfig& cfg, std::ostream& out);

/// Full entry point: argv parsing, config loading and dispatch.
int run_cli(int argc, char** argv);

}  // namespace kgnf
