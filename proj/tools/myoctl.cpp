#include <iostream>

#include "myoctl/cli.hpp"

int main(int argc, char** argv) {
    const auto parsed = myoctl::cli::parse_args(argc, argv, std::cout, std::cerr);
    if (!parsed.command) return parsed.exit_code;
    return myoctl::cli::run(*parsed.command, std::cout, std::cerr);
}
