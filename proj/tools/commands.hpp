#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pinn::cli {

enum ExitCode : int { Ok = 0, Usage = 1, Numerical = 2, Data = 3 };

/// Runs one pinn_cli invocation. args excludes the program name. Artifacts
/// go under the command's output directory; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pinn::cli
