#include <iostream>

#include "twostep/cli.hpp"

int main(int argc, char** argv) { return twostep::cli_main(argc, argv, std::cout, std::cerr); }
