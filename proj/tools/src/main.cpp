#include <iostream>

#include "hnag_cli/cli.hpp"

int main(int argc, char** argv) { return hnag::cli::main_entry(argc, argv, std::cout, std::cerr); }
