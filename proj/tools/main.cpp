#include <iostream>

#include "mlrules/cli.hpp"

int main(int argc, char** argv) { return mlrules::run_cli(argc, argv, std::cout, std::cerr); }
