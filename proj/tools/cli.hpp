#pragma once

#include <iosfwd>

namespace ncclock::cli {

// Exit codes: 0 success, 1 input error, 2 completed with instability or infeasibility warnings.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ncclock::cli
