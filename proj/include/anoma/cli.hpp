#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace anoma::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name. Machine-readable output goes to `out`,
/// diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace anoma::cli
