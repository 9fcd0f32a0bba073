#include <iostream>

#include "ggrf/cli.hpp"

int main(int argc, char** argv) { return ggrf::cli::run(argc, argv, std::cout, std::cerr); }
