#include <iostream>

#include "voucher/cli.hpp"

int main(int argc, char** argv) { return voucher::cli::run(argc, argv, std::cout, std::cerr); }
