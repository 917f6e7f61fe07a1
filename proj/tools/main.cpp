#include <iostream>

#include "jbt/cli.hpp"

int main(int argc, char** argv) { return jbt::cli::run(argc, argv, std::cout, std::cerr); }
