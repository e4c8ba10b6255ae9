#include <iostream>
#include <string>
#include <vector>

#include "liecouple/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return liecouple::run_command(args, std::cout, std::cerr);
}
