#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vmrd::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kCapError = 2;
inline constexpr int kNumericalError = 3;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vmrd::cli
