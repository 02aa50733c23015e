#include <iostream>

#include "depagg/cli.hpp"

int main(int argc, char** argv) { return depagg::run_cli(argc, argv, std::cout, std::cerr); }
