#include <iostream>
#include <string>
#include <vector>

#include "passmat/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return passmat::cli::run(args, std::cout, std::cerr);
}
