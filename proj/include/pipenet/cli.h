#pragma once

// Command-line front end. Subcommands: preprocess, simulate, calibrate,
// validate, setpoint-run, setpoint-compare, report.
//
// Exit codes: 0 success, 1 usage error, 2 data error (bad or missing
// input), 3 hydraulic convergence failure.

#include <iosfwd>

namespace pipenet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitConvergence = 3;

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pipenet
