#include <iostream>

#include "madrl/cli/commands.hpp"

int main(int argc, char** argv) { return madrl::cli::run_cli(argc, argv, std::cout, std::cerr); }
