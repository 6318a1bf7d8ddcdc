#pragma once

#include "samedge/plot.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace samedge {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,       // validation / usage problems
    kExitIo = 2,          // unreadable or unwritable files
    kExitVerifyFail = 3,  // a verification suite reported mismatches
};

using KeyValue = std::pair<std::string, std::string>;

/// Runs one experiment from a config file (plus --section.key overrides) and
/// writes its CSV log. Divergence is a flagged outcome, not an error.
int cmd_run(const std::string& config_path, const std::vector<KeyValue>& overrides);

/// Runs the (eta x rho) grid and writes per-run logs plus manifest.csv.
int cmd_grid(const std::string& config_path, const std::vector<KeyValue>& overrides,
             const std::vector<double>& etas, const std::vector<double>& rhos,
             const std::string& out_dir);

/// Randomized verification of the quadratic-case stability results; prints
/// one PASS/FAIL line per check (prop1_sign, prop3_sign, eq3_closed_form,
/// edge_bisection).
int cmd_verify(long trials, std::uint64_t seed);

/// Renders an SVG chart from one or more logs.
int cmd_plot(const PlotSpec& spec);

/// Full argv interface; returns the process exit code.
int run_cli(int argc, const char* const* argv);

/// Default log directory: $SAMEDGE_LOG_DIR or "." when unset.
std::string default_log_dir();

}  // namespace samedge
