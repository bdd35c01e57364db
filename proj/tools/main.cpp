#include "chronocalc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return chronocalc::cli::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
