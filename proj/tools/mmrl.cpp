#include <iostream>

#include "mmrl/cli.hpp"

int main(int argc, char** argv) {
  return mmrl::cli::main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
