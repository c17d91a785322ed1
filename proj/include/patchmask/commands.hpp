#pragma once

#include <iosfwd>

#include "patchmask/config.hpp"

namespace patchmask {

// Exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitConvergence = 4,
};

int exit_code_for(const std::exception& error);

// Each command writes its artifacts under config.output and its summary to `out`.
// Errors propagate as exceptions; `run` maps them to exit codes.
void run_mask(const RunConfig& config, std::ostream& out);
int run_calibrate(const RunConfig& config, std::ostream& out);
void run_train(const RunConfig& config, std::ostream& out);
void run_stats(const RunConfig& config, std::ostream& out);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace patchmask
