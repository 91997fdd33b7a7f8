#include <iostream>
#include <string>
#include <vector>

#include "pathspin/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pathspin::cli::run(args, std::cout, std::cerr);
}
