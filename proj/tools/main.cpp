#include <iostream>

#include "rowcalc/cli.hpp"

int main(int argc, char** argv) { return rowcalc::run_cli(argc, argv, std::cout, std::cerr); }
