#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace scratchsim::diophantine {

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

/// K groups of n reals, each group summing to a rational A/B, and a budget Q.
struct ApproximationProblem {
    std::vector<std::vector<double>> groups;
    std::vector<Rational> constraints;
    std::uint64_t Q = 0;

    int n() const { return groups.empty() ? 0 : static_cast<int>(groups.front().size()); }
    int K() const { return static_cast<int>(groups.size()); }
    /// Throws DomainError unless every invariant holds.
    void validate() const;
};

struct RationalApproximation {
    std::uint64_t q = 0;
    std::vector<std::vector<std::int64_t>> numerators;
    /// 1 / (q Q^{1/(nK)})
    long double bound = 0;
    double max_error = 0;
    /// Unit numerator adjustments made to satisfy the group sums.
    int repairs = 0;
    double repair_penalty = 0;
    /// (group, index) of numerators equal to zero.
    std::vector<std::pair<int, int>> zero_numerators;
};

struct CertificateReport {
    bool q_in_range = false;
    bool shape_ok = false;
    bool bound_ok = false;
    bool constraint_ok = false;
    double max_error = 0;
    long double bound = 0;
    std::vector<std::string> failures;

    bool passed() const { return q_in_range && shape_ok && bound_ok && constraint_ok; }
};

/// Smallest legal budget: (n max|B|)^{nK} + 1. Throws DomainError if it does
/// not fit in 64 bits.
std::uint64_t minimal_legal_Q(int n, int K, std::int64_t max_den);

/// Scans q = 1..Q and returns the first q whose rounded and sum-repaired
/// numerators pass both exact certificates.
RationalApproximation solve(const ApproximationProblem& problem);

/// Exact re-check of q <= Q, the error bound and the group sums.
CertificateReport verify(const ApproximationProblem& problem, const RationalApproximation& candidate);

ApproximationProblem problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ApproximationProblem& problem);
nlohmann::json to_json(const RationalApproximation& approx, const CertificateReport& report);

}  // namespace scratchsim::diophantine
