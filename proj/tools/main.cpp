#include <iostream>

#include "endorhythm/cli.hpp"

int main(int argc, char** argv) { return endorhythm::cli::run_cli(argc, argv, std::cout, std::cerr); }
