#include <iostream>

#include "bihc/cli.hpp"

int main(int argc, char** argv) {
  return bihc::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
