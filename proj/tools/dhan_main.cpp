#include <iostream>

#include "dhan/cli.hpp"

int main(int argc, char** argv) {
  return dhan::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
