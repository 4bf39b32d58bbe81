#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace scratchsim::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    /// One-line measured values, printed after the verdict.
    std::string summary;
    nlohmann::json detail;
};

struct SuiteOptions {
    /// Holds theorem1.json and theorem2.json.
    std::filesystem::path config_dir;
    /// Pipeline reports and summary.json go here when set.
    std::filesystem::path out_dir;
    /// Criterion ids to run; empty runs all eight.
    std::vector<int> only;
};

CriterionResult check_diophantine();
CriterionResult check_theorem1(const SuiteOptions& options);
CriterionResult check_theorem2(const SuiteOptions& options);
CriterionResult check_insensitivity(const SuiteOptions& options);
CriterionResult check_scratch_structure();
CriterionResult check_constrained_motion();
CriterionResult check_inverse_timing();
CriterionResult check_determinism(const SuiteOptions& options);

/// `PASS [n] title (t s): summary`
std::string format_line(const CriterionResult& r);

/// Runs the selected criteria in order, printing one line each to `log` as
/// soon as it finishes.
std::vector<CriterionResult> run_suite(const SuiteOptions& options, std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace scratchsim::acceptance
