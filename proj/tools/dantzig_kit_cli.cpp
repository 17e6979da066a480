#include <iostream>

#include "dantzig_kit/cli.hpp"

int main(int argc, char** argv) { return dantzig_kit::cli::run_cli(argc, argv, std::cout, std::cerr); }
