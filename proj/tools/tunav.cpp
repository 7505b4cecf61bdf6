#include <iostream>

#include "tunav/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tunav::run_cli(args, std::cout, std::cerr);
}
