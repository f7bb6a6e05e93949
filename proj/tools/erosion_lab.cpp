#include "erosion/harness.hpp"

#include <iostream>

int main(int argc, char** argv) { return erosion::run_cli(argc, argv, std::cout, std::cerr); }
