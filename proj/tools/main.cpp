#include <iostream>

#include "barylab/cli/cli.hpp"

int main(int argc, char** argv) {
  return barylab::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
