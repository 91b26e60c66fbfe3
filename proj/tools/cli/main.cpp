#include <iostream>

#include "raid_app/cli.hpp"

int main(int argc, char** argv) { return raid::app::run_cli(argc, argv, std::cout, std::cerr); }
