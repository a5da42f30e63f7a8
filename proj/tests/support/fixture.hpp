#pragma once

#include "pdms/parser.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#ifndef PDMS_SCENARIO_DIR
#define PDMS_SCENARIO_DIR "."
#endif
#ifndef PDMS_GOLDEN_DIR
#define PDMS_GOLDEN_DIR "."
#endif

namespace testsupport {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture_path() { return std::string(PDMS_SCENARIO_DIR) + "/emergency.pdms"; }

inline pdms::Scenario load_fixture() { return pdms::parse_scenario(read_file(fixture_path())); }

inline std::string golden_path(const std::string& name) {
    return std::string(PDMS_GOLDEN_DIR) + "/" + name;
}

}  // namespace testsupport
