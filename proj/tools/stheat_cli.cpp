#include <iostream>
#include <string>
#include <vector>

#include "stheat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stheat::cli_main(args, std::cout, std::cerr);
}
