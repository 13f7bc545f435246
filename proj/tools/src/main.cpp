#include <iostream>

#include "regret_cli/cli.hpp"

int main(int argc, char** argv) { return regret::cli::run(argc, argv, std::cout, std::cerr); }
