#include <iostream>
#include <string>
#include <vector>

#include "arw/cli.hpp"

int main(int argc, char** argv) {
  return arw::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
