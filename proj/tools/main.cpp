#include <iostream>

#include "oscint/harness.hpp"

int main(int argc, char** argv) { return oscint::cli_main(argc, argv, std::cout, std::cerr); }
