#include <iostream>

#include "adnet/cli.hpp"

int main(int argc, char** argv) { return adnet::run_cli(argc, argv, std::cout, std::cerr); }
