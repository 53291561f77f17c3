#include <iostream>

#include "qlmm/cli.hpp"

int main(int argc, char** argv) { return qlmm::run_cli(argc, argv, std::cout, std::cerr); }
