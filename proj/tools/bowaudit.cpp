#include <iostream>

#include "bowaudit/cli.hpp"

int main(int argc, char** argv) {
  return bowaudit::run_command(argc, argv, std::cout, std::cerr, std::cin);
}
