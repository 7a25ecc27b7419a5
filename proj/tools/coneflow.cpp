#include "coneflow/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return coneflow::run_cli(argc, argv, std::cout, std::cerr);
}
