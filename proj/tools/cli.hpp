#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace memphase::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kConfig = 2, kDomain = 3, kIo = 4 };

/// Runs one command line. args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The quick consistency suite behind `memphase selftest`. Prints one line
/// per check; returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace memphase::cli
