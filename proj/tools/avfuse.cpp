#include <iostream>

#include "avf/cli.hpp"

int main(int argc, char** argv) { return avf::cli::dispatch(argc, argv, std::cout, std::cerr); }
