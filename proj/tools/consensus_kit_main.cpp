#include "consensus/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return consensus::cli::main(argc, argv, std::cout, std::cerr); }
