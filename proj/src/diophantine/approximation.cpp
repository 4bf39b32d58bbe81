#include "scratchsim/diophantine/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "scratchsim/error.hpp"

namespace scratchsim::diophantine {

using boost::multiprecision::cpp_int;

namespace {

cpp_int pow_int(cpp_int base, unsigned e) {
    cpp_int r = 1;
    while (e) {
        if (e & 1u) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

/// Exact dyadic form of a finite double: x = mantissa / 2^shift.
struct Dyadic {
    cpp_int mantissa;
    unsigned shift = 0;
};

Dyadic to_dyadic(double x) {
    int e = 0;
    const double m = std::frexp(std::fabs(x), &e);
    // m in [0.5, 1): 53 significant bits.
    auto scaled = static_cast<std::uint64_t>(std::ldexp(m, 53));
    e -= 53;
    while (e < 0 && scaled != 0 && (scaled & 1u) == 0) {
        scaled >>= 1;
        ++e;
    }
    Dyadic d;
    d.mantissa = scaled;
    if (e >= 0)
        d.mantissa <<= e;
    else if (scaled != 0)
        d.shift = static_cast<unsigned>(-e);
    if (x < 0) d.mantissa = -d.mantissa;
    return d;
}

/// |alpha - a/q| < 1/(q Q^{1/p})  <=>  |q M - a 2^s|^p Q < 2^{s p}.
bool bound_holds_exact(const Dyadic& alpha, std::uint64_t q, std::int64_t a, std::uint64_t Q, unsigned p) {
    cpp_int diff = cpp_int(q) * alpha.mantissa - (cpp_int(a) << alpha.shift);
    if (diff < 0) diff = -diff;
    const cpp_int lhs = pow_int(diff, p) * cpp_int(Q);
    const cpp_int rhs = cpp_int(1) << (alpha.shift * p);
    return lhs < rhs;
}

bool sum_holds_exact(const std::vector<std::int64_t>& a, const Rational& c, std::uint64_t q) {
    cpp_int s = 0;
    for (auto v : a) s += v;
    return cpp_int(c.den) * s == cpp_int(c.num) * cpp_int(q);
}

long double bound_value(std::uint64_t q, std::uint64_t Q, int p) {
    return 1.0L / (static_cast<long double>(q) * std::pow(static_cast<long double>(Q), 1.0L / p));
}

}  // namespace

void ApproximationProblem::validate() const {
    if (groups.empty()) throw DomainError("approximation problem needs at least one group");
    if (constraints.size() != groups.size()) throw DomainError("one constraint per group is required");
    const std::size_t n0 = groups.front().size();
    if (n0 == 0) throw DomainError("groups must be non-empty");
    std::int64_t max_den = 0;
    for (std::size_t r = 0; r < groups.size(); ++r) {
        if (groups[r].size() != n0) throw DomainError("all groups must have the same length");
        const auto& c = constraints[r];
        if (c.den == 0) throw DomainError("constraint denominator must be non-zero");
        if (c.den == std::numeric_limits<std::int64_t>::min())
            throw DomainError("constraint denominator overflows");
        max_den = std::max(max_den, c.den < 0 ? -c.den : c.den);
        long double s = 0;
        for (double x : groups[r]) {
            if (!std::isfinite(x)) throw DomainError("alphas must be finite");
            if (std::fabs(x) * static_cast<long double>(Q) > 0x1p62L)
                throw DomainError("alpha * Q overflows 64-bit numerators");
            s += x;
        }
        const long double target = static_cast<long double>(c.num) / static_cast<long double>(c.den);
        if (std::fabs(s - target) >= 1e-12L)
            throw DomainError("group " + std::to_string(r) + " does not sum to its rational constraint");
    }
    if (Q < minimal_legal_Q(static_cast<int>(n0), static_cast<int>(groups.size()), max_den))
        throw DomainError("Q must exceed (n max|B|)^{nK}");
}

std::uint64_t minimal_legal_Q(int n, int K, std::int64_t max_den) {
    if (n <= 0 || K <= 0 || max_den <= 0) throw DomainError("minimal_legal_Q needs positive n, K, B");
    const cpp_int v = pow_int(cpp_int(n) * cpp_int(max_den), static_cast<unsigned>(n * K)) + 1;
    if (v > cpp_int(std::numeric_limits<std::uint64_t>::max()))
        throw DomainError("minimal legal Q does not fit in 64 bits");
    return static_cast<std::uint64_t>(v);
}

RationalApproximation solve(const ApproximationProblem& problem) {
    problem.validate();
    const int n = problem.n();
    const int K = problem.K();
    const int p = n * K;
    const std::uint64_t Q = problem.Q;

    std::vector<std::vector<Dyadic>> exact(K);
    for (int r = 0; r < K; ++r)
        for (double x : problem.groups[r]) exact[r].push_back(to_dyadic(x));

    // Bound on |q alpha - a| shared by every q.
    const long double thr = std::pow(static_cast<long double>(Q), -1.0L / p);

    std::vector<std::vector<std::int64_t>> a(K, std::vector<std::int64_t>(n));
    for (std::uint64_t q = 1; q <= Q; ++q) {
        const auto lq = static_cast<long double>(q);
        bool feasible = true;
        int repairs = 0;
        double penalty = 0;
        long double worst = 0;
        for (int r = 0; r < K && feasible; ++r) {
            const auto& c = problem.constraints[r];
            // Target sum A q / B must be an integer.
            const cpp_int num = cpp_int(c.num) * cpp_int(q);
            if (num % c.den != 0) {
                feasible = false;
                break;
            }
            const auto target = static_cast<std::int64_t>(num / c.den);
            std::int64_t sum = 0;
            for (int j = 0; j < n; ++j) {
                a[r][j] = std::llround(lq * problem.groups[r][j]);
                sum += a[r][j];
            }
            while (sum != target) {
                const int dir = sum < target ? 1 : -1;
                int best = -1;
                long double best_pen = std::numeric_limits<long double>::infinity();
                for (int j = 0; j < n; ++j) {
                    const long double x = lq * problem.groups[r][j];
                    const long double pen = std::fabs(x - (a[r][j] + dir)) - std::fabs(x - a[r][j]);
                    if (pen < best_pen) {
                        best_pen = pen;
                        best = j;
                    }
                }
                a[r][best] += dir;
                sum += dir;
                ++repairs;
                penalty += static_cast<double>(best_pen);
            }
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::fabs(lq * problem.groups[r][j] - a[r][j]));
        }
        if (!feasible) continue;
        // Long double screen with slack; the exact test decides.
        if (worst > thr * (1.0L + 1e-9L)) continue;
        bool ok = true;
        for (int r = 0; r < K && ok; ++r) {
            ok = sum_holds_exact(a[r], problem.constraints[r], q);
            for (int j = 0; j < n && ok; ++j) ok = bound_holds_exact(exact[r][j], q, a[r][j], Q, p);
        }
        if (!ok) continue;

        RationalApproximation out;
        out.q = q;
        out.numerators = a;
        out.bound = bound_value(q, Q, p);
        out.repairs = repairs;
        out.repair_penalty = penalty;
        for (int r = 0; r < K; ++r)
            for (int j = 0; j < n; ++j) {
                out.max_error = std::max(
                    out.max_error, std::fabs(problem.groups[r][j] - static_cast<double>(a[r][j]) / static_cast<double>(q)));
                if (a[r][j] == 0) out.zero_numerators.emplace_back(r, j);
            }
        return out;
    }
    throw InternalError("no q <= Q satisfies the approximation; preconditions must be violated");
}

CertificateReport verify(const ApproximationProblem& problem, const RationalApproximation& c) {
    CertificateReport rep;
    const int K = problem.K();
    const int n = problem.n();
    rep.q_in_range = c.q >= 1 && c.q <= problem.Q;
    if (!rep.q_in_range) rep.failures.push_back("q outside [1, Q]");
    rep.shape_ok = static_cast<int>(c.numerators.size()) == K && static_cast<int>(problem.constraints.size()) == K &&
                   std::all_of(c.numerators.begin(), c.numerators.end(),
                               [&](const auto& g) { return static_cast<int>(g.size()) == n; }) &&
                   std::all_of(problem.groups.begin(), problem.groups.end(),
                               [&](const auto& g) { return static_cast<int>(g.size()) == n; });
    if (!rep.shape_ok) {
        rep.failures.push_back("numerator shape does not match the problem");
        return rep;
    }
    if (c.q == 0 || n == 0 || problem.Q == 0) return rep;
    const unsigned p = static_cast<unsigned>(n * K);
    rep.bound = bound_value(c.q, problem.Q, static_cast<int>(p));
    rep.bound_ok = true;
    rep.constraint_ok = true;
    for (int r = 0; r < K; ++r) {
        for (int j = 0; j < n; ++j) {
            const double x = problem.groups[r][j];
            const auto aj = c.numerators[r][j];
            rep.max_error = std::max(rep.max_error, std::fabs(x - static_cast<double>(aj) / static_cast<double>(c.q)));
            if (!std::isfinite(x) || !bound_holds_exact(to_dyadic(x), c.q, aj, problem.Q, p)) {
                rep.bound_ok = false;
                rep.failures.push_back("error bound violated at group " + std::to_string(r) + ", index " +
                                       std::to_string(j));
            }
        }
        if (problem.constraints[r].den == 0 || !sum_holds_exact(c.numerators[r], problem.constraints[r], c.q)) {
            rep.constraint_ok = false;
            rep.failures.push_back("group " + std::to_string(r) + " sum differs from its constraint");
        }
    }
    return rep;
}

ApproximationProblem problem_from_json(const nlohmann::json& j) {
    try {
        ApproximationProblem p;
        for (const auto& g : j.at("alphas")) p.groups.push_back(g.get<std::vector<double>>());
        for (const auto& c : j.at("constraints")) {
            if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
                throw DomainError("constraints must be integer pairs [A, B]");
            p.constraints.push_back({c[0].get<std::int64_t>(), c[1].get<std::int64_t>()});
        }
        const auto& q = j.at("Q");
        if (!q.is_number_integer() || q.get<std::int64_t>() <= 0) throw DomainError("Q must be a positive integer");
        p.Q = q.get<std::uint64_t>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed approximation problem: ") + e.what());
    }
}

nlohmann::json to_json(const ApproximationProblem& problem) {
    nlohmann::json j;
    j["alphas"] = problem.groups;
    auto cs = nlohmann::json::array();
    for (const auto& c : problem.constraints) cs.push_back({c.num, c.den});
    j["constraints"] = cs;
    j["Q"] = problem.Q;
    return j;
}

nlohmann::json to_json(const RationalApproximation& a, const CertificateReport& rep) {
    nlohmann::json j;
    j["q"] = a.q;
    j["numerators"] = a.numerators;
    j["bound"] = static_cast<double>(a.bound);
    j["max_error"] = a.max_error;
    j["repairs"] = a.repairs;
    j["repair_penalty"] = a.repair_penalty;
    auto zeros = nlohmann::json::array();
    for (auto [r, i] : a.zero_numerators) zeros.push_back({r, i});
    j["zero_numerators"] = zeros;
    j["checks"] = {{"q_in_range", rep.q_in_range},
                   {"shape", rep.shape_ok},
                   {"bound", rep.bound_ok},
                   {"constraint", rep.constraint_ok},
                   {"passed", rep.passed()}};
    j["failures"] = rep.failures;
    return j;
}

}  // namespace scratchsim::diophantine
