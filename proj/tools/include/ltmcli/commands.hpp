#pragma once

#include <ostream>
#include <string>

#include "ltmcli/scenario.hpp"

namespace ltm::cli {

struct Options {
    std::string out_dir = "out";
    double tol_rel = 0.0;    // 0 = keep the scenario's value
    int path_samples = 0;    // 0 = keep the scenario's value
};

// exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitCertificateFailure = 2;
inline constexpr int kExitValidationError = 3;
inline constexpr int kExitNumericFailure = 4;

/// Runs one subcommand against a scenario; prints to `out` and writes CSV
/// artifacts under opts.out_dir. Returns a process exit code.
int run_command(const std::string& command, Scenario scenario, const Options& opts,
                std::ostream& out);

/// Runs a builtin configuration end to end and diffs against the published
/// reference values. name is one of ex18, ex16, bio-r, bio-k.
int run_reproduce(const std::string& name, const Options& opts, std::ostream& out);

/// Maps thrown errors to the documented exit codes.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace ltm::cli
