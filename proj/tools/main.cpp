#include <iostream>

#include "transient/cli.hpp"

int main(int argc, char** argv) { return transient::cli::dispatch(argc, argv, std::cout, std::cerr); }
