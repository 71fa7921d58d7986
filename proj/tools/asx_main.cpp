#include <iostream>

#include "asx/cli.hpp"

int main(int argc, char** argv) { return asx::cli::run(argc, argv, std::cout, std::cerr); }
