#pragma once

#include "coneflow/continuation.hpp"

#include <iosfwd>
#include <string>

namespace coneflow {

// Exit codes of the command-line driver.
enum ExitCode : int {
    kExitOk = 0,
    // flow, solver or invariant failure during the requested work
    kExitRuntime = 1,
    // bad command line, config or input file
    kExitUsage = 2,
    // continuation stopped early or fixtures check failed
    kExitIncomplete = 3,
};

std::string tool_version();

// JSON document for a continuation report (runtimes excluded; they go to the manifest).
std::string report_json(const ContinuationReport& report);

// Entry point of the `coneflow` executable. Errors are written to err as one
// JSON object per line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace coneflow
