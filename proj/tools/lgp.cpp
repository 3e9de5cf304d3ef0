#include <iostream>

#include "lgp/cli.hpp"

int main(int argc, char** argv) {
  return lgp::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
