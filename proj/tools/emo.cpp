#include <iostream>

#include "emo/cli/cli.hpp"

int main(int argc, char** argv) {
  return emo::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
