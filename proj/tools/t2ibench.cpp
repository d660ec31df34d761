#include <iostream>
#include <string>
#include <vector>

#include "t2ibench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return t2ibench::run_cli(args, std::cout, std::cerr);
}
