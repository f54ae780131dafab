#include "teamrep/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return teamrep::run_cli(argc, argv, std::cout, std::cerr); }
