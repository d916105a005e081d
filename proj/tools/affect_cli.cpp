#include <iostream>

#include "affect/cli/app.hpp"

int main(int argc, char** argv) { return affect::cli::run(argc, argv, std::cout, std::cerr); }
