#include <iostream>

#include "ftm/cli.hpp"

int main(int argc, char** argv) { return ftm::run_cli(argc, argv, std::cout, std::cerr); }
