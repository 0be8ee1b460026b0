#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rankvec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs the rankvec command line. args[0] is the program name. Results go to
// `out`; the resolved configuration, warnings, and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace rankvec::cli
