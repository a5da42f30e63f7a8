#pragma once

#include <string>
#include <vector>

namespace pdms::cli {

/// Exit code 0: success. 1: domain failure (loss without a repair,
/// untranslatable query, bad scenario semantics). 2: usage errors.
struct CommandResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

CommandResult run(const std::vector<std::string>& args);

}  // namespace pdms::cli
