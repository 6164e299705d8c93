#pragma once

#include <string>
#include <vector>

namespace nep::cli {

/// Entry point used by the `nep` binary and the test suite.
/// Exit codes: 0 success, 2 validation failure, 3 solver failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace nep::cli
