#include <cstdio>
#include <string>
#include <vector>

#include "peaks/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  peaks::cli::CommandResult res = peaks::cli::run_command(args);
  std::fputs(res.report.c_str(), stdout);
  return res.exit_code;
}
