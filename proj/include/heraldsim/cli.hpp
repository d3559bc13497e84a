#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace heraldsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

/// Entry point of the heraldsim command line. Commands: simulate, sweep,
/// estimate, fringe, report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace heraldsim
