#include <iostream>
#include <string>
#include <vector>

#include "rankvec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return rankvec::cli::run(args, std::cout, std::cerr);
}
