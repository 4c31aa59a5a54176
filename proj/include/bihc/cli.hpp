#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bihc {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitIo = 3 };

/// Subcommands: precompute, deform, validate, serve. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bihc
