#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gaf::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericFailure = 3;
inline constexpr int kIoError = 4;

// Runs one gaflab invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gaf::cli
