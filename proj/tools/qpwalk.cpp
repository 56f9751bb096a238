#include "qpwalk/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qpwalk::cli::main_entry(argc, argv, std::cout, std::cerr); }
