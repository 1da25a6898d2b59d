#include <iostream>
#include <string>
#include <vector>

#include "panocalib/cli.hpp"

int main(int argc, char** argv) {
  return panocalib::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
