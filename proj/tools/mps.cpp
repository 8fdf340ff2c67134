#include <iostream>

#include "mps/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mps::run_cli(args, std::cout, std::cerr);
}
