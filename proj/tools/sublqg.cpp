#include <iostream>

#include <sublqg/cli.hpp>

int main(int argc, char** argv) {
    return sublqg::cli::run(argc, argv, std::cout, std::cerr);
}
