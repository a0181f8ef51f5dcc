#include <iostream>
#include <string>
#include <vector>

#include "resbit/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  const std::vector<std::string> args(argv, argv + argc);
  const int code = resbit::cli::run(args, std::cout, std::cerr);
  std::cout.flush();
  return code;
}
