#include "lossequiv/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return lossequiv::run_cli(argc, argv, std::cout, std::cerr);
}
