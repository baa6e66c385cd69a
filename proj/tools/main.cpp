#include <iostream>

#include "mppctl/cli.hpp"

int main(int argc, char** argv) { return mppctl::run_cli(argc, argv, std::cout, std::cerr); }
