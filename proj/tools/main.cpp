#include <iostream>

#include "c2b/cli.hpp"

int main(int argc, char** argv) { return c2b::dispatch(argc, argv, std::cout, std::cerr); }
