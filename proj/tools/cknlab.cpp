#include <iostream>

#include "cknlab/cli.hpp"

int main(int argc, char** argv) { return cknlab::run_cli(argc, argv, std::cout, std::cerr); }
