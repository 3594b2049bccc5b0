#include "ecx/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return ecx::cli::run(argc, argv, std::cout, std::cerr); }
