#include <iostream>

#include "varid/cli.hpp"

int main(int argc, char** argv) { return varid::cli::run(argc, argv, std::cout, std::cerr); }
