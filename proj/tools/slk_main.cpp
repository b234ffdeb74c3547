#include <iostream>
#include <string>
#include <vector>

#include "slk/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return slk::cli::run(args, std::cout, std::cerr);
}
