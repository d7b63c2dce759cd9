#include <iostream>
#include <string>
#include <vector>

#include "attackmap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return attackmap::cli::run(args, std::cout, std::cerr);
}
