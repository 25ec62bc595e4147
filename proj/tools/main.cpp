#include <iostream>

#include "hybridlens/cli.hpp"

int main(int argc, char** argv) { return hybridlens::cli::run(argc, argv, std::cout, std::cerr); }
