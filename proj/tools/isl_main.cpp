#include <iostream>

#include "isl/cli/commands.hpp"

int main(int argc, char** argv) { return isl::cli::run(argc, argv, std::cout, std::cerr); }
