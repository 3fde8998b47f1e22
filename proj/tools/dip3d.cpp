#include <iostream>
#include <string>
#include <vector>

#include "dip3d/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dip3d::cli::run(args, std::cout, std::cerr);
}
