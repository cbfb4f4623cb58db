#include <iostream>

#include "ngsvj/cli.hpp"

int main(int argc, char** argv) { return ngsvj::cli::run(argc, argv, std::cout, std::cerr); }
