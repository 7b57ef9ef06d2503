#include <iostream>

#include "gevk/cli.hpp"

int main(int argc, char** argv) { return gevk::cli::run(argc, argv, std::cout, std::cerr); }
