#include <iostream>

#include "diode/cli.hpp"

int main(int argc, char** argv) {
    return diode::cli::run(argc, argv, std::cout, std::cerr);
}
