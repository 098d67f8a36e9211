#include <iostream>

#include "iscreen/cli.hpp"

int main(int argc, char** argv) {
    return iscreen::cli::run_cli(argc, argv, std::cout, std::cerr);
}
