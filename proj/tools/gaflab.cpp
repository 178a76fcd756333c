#include <iostream>

#include "gaf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return gaf::cli::run(args, std::cout, std::cerr);
}
