#include <cstdlib>
#include <iostream>
#include <string>

#include "scratchsim/acceptance/suite.hpp"

// Prints one PASS/FAIL line per acceptance criterion. Optional arguments
// select criteria by number.
int main(int argc, char** argv) {
    scratchsim::acceptance::SuiteOptions options;
    options.config_dir = SCRATCHSIM_CONFIG_DIR;
    if (const char* out = std::getenv("SCRATCHSIM_ACCEPTANCE_OUT")) options.out_dir = out;
    for (int i = 1; i < argc; ++i) options.only.push_back(std::stoi(argv[i]));
    const auto results = scratchsim::acceptance::run_suite(options, std::cout);
    int passed = 0;
    for (const auto& r : results) passed += r.passed;
    std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
    return scratchsim::acceptance::all_passed(results) ? 0 : 1;
}
