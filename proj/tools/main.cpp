#include <iostream>

#include "steinewma/cli.hpp"

int main(int argc, char** argv) { return steinewma::run_cli(argc, argv, std::cout, std::cerr); }
