#include <iostream>
#include <string>
#include <vector>

#include "unlinking/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return unlinking::cli::run(args, std::cout, std::cerr);
}
