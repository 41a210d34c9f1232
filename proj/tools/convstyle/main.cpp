#include "runtime.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return convstyle::cli::run_cli(argc, argv, std::cout, std::cerr, convstyle::process_env());
}
