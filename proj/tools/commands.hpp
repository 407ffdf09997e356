#pragma once

#include <iosfwd>

namespace pdmkit::cli {

enum ExitCode : int {
  kOk = 0,
  kSelftestFailed = 1,
  kUsage = 2,
  kNumerical = 3,
  kDataIntegrity = 4,
};

/// Runs the command line; output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdmkit::cli
