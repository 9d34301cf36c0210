#include <iostream>
#include <string>
#include <vector>

#include "ifbs_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ifbs::cli::main_entry(args, std::cout, std::cerr);
}
