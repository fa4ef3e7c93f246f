#pragma once

#include <string>
#include <vector>

namespace peaks::cli {

struct CommandResult {
  int exit_code = 0;   // 0 ok, 1 verification violation, 2 input error
  std::string report;  // deterministic: identical inputs, identical bytes
};

// Subcommands: solve, verify pair|klgen|lyapunov,
// convert pair-to-klgen|klgen-to-pair|pair-to-lyapunov|lyapunov-to-pair,
// tables 1|2|3, example --p <v> --mu <v>.
// Shared flags: --input <file> --grid <n> --refine <n> --horizon <n>
// --tolerance <x> --format text|csv.
CommandResult run_command(const std::vector<std::string>& argv);

std::string usage();

}  // namespace peaks::cli
