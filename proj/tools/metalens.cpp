#include <iostream>

#include "metalens/cli.hpp"

int main(int argc, char** argv) {
  return metalens::cli_main(argc, argv, std::cout, std::cerr);
}
