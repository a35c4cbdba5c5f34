#include <iostream>
#include <string>
#include <vector>

#include "physid/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return physid::run_cli(args, std::cout, std::cerr);
}
