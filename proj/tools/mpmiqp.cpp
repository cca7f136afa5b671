#include <iostream>
#include <string>
#include <vector>

#include "mpmiqp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mpmiqp::run_cli(args, std::cout, std::cerr);
}
