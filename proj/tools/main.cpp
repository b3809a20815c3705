#include <iostream>

#include "cdc/log.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  cdc::init_logging_from_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return cdc::cli::run(args, std::cout, std::cerr);
}
