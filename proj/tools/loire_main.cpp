#include <iostream>

#include "loire/cli/commands.hpp"

int main(int argc, char** argv) { return loire::cli::run(argc, argv, std::cout, std::cerr); }
