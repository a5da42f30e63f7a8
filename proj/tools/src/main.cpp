#include "pdms_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    pdms::cli::CommandResult res = pdms::cli::run(args);
    if (!res.out.empty()) std::cout << res.out;
    if (!res.err.empty()) std::cerr << res.err;
    return res.exit_code;
}
