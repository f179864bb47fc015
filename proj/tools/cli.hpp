#pragma once

#include <iosfwd>

namespace tmvn::cli {

/// Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 budget exhausted.
enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kBudget = 3 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmvn::cli
