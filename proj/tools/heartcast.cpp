#include <iostream>

#include "heartcast/cli.hpp"

int main(int argc, char** argv) { return heartcast::execute(argc, argv, std::cout, std::cerr); }
