#include <iostream>

#include "perch/cli.hpp"

int main(int argc, char** argv) {
  return perch::cli_main(argc, argv, std::cout, std::cerr);
}
