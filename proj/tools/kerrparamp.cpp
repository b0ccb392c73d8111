#include <iostream>
#include <string>
#include <vector>

#include "kerrparamp/cli.hpp"
#include "kerrparamp/log.hpp"

int main(int argc, char** argv) {
  kerrparamp::log::init_from_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return kerrparamp::run_cli(args, std::cout, std::cerr);
}
