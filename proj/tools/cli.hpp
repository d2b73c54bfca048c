#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfan::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

/// Runs one command line. `args` excludes the program name, e.g.
/// {"backtest", "--data", "wind.csv", ...}. Normal output goes to `out`,
/// diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfan::cli
