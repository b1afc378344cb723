#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmrl::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalFailure = 3 };

/// Entry point of the `mmrl` tool; `args` excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmrl::cli
