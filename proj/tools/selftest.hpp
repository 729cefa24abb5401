#pragma once

#include <string>
#include <vector>

#include "folsim/checks.hpp"

namespace folsim::cli {

struct SelftestArgs {
    Scale scale = Scale::Quick;
    std::vector<int> criteria;  // empty: all
    std::string work_dir;
    int threads = 0;
    bool json = false;
    bool inject_fault = false;
};

// Prints one line per criterion (or a JSON document) and returns the exit code.
int run_selftest(const SelftestArgs& args);

}  // namespace folsim::cli
