#include <iostream>

#include "respchain/cli.hpp"

int main(int argc, char **argv) {
  const auto outcome = respchain::cli::run(argc, argv);
  std::cout << outcome.out;
  std::cerr << outcome.err;
  return outcome.exit_code;
}
