#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace synthts::cli {

/// Exit codes: 0 success, 1 internal error, 2 usage or validation error.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synthts::cli
