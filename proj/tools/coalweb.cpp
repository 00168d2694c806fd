#include <iostream>
#include <string>
#include <vector>

#include "coalweb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return coalweb::cli_main(args, std::cout, std::cerr);
}
