#include <iostream>

#include "polishsense/pipeline.hpp"

int main(int argc, char** argv) { return polishsense::run_cli(argc, argv, std::cout, std::cerr); }
