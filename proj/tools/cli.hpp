#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lakenet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalAbort = 3 };

/// Runs the command line; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lakenet::cli
