#include <iostream>

#include "sarship/cli.hpp"

int main(int argc, char** argv) { return sarship::cli::run(argc, argv, std::cout, std::cerr); }
