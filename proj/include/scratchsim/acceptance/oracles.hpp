#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "scratchsim/diophantine/approximation.hpp"
#include "scratchsim/geometry/curve.hpp"
#include "scratchsim/quantum/potential.hpp"
#include "scratchsim/random.hpp"
#include "scratchsim/scratch/tangential.hpp"
#include "scratchsim/vec.hpp"

// Reference implementations used to cross-check the library: brute force,
// RK4 and fixed-panel Gauss cubature, sharing no code with the routines they test.
namespace scratchsim::acceptance::oracle {

struct CurveState {
    double s = 0.0;
    double sdot = 0.0;
};

/// RK4 for m (g s'' + g' s'^2 / 2) = -V'(s), g = |dq/ds|^2, sampled at `times`.
inline std::vector<CurveState> integrate_lagrange(const geometry::ScratchCurve& c,
                                                  const scratch::TangentialPotential& V, double m,
                                                  const std::vector<double>& times, double s0, double v0,
                                                  double dt) {
    auto accel = [&](double s, double v) {
        const double sc = std::min(std::max(s, 0.0), 1.0);
        const Vec d1 = c.derivative(sc), d2 = c.second_derivative(sc);
        const double g = dot(d1, d1), dg = 2.0 * dot(d1, d2);
        // Stages that overshoot the last checkpoint see the end slope, not the flat extension.
        const double sv = V.empty() ? s : std::clamp(s, V.breaks().front(), V.breaks().back());
        return (-V.derivative(sv) / m - 0.5 * dg * v * v) / g;
    };
    // Returns the span of stage positions so kinks between stages are seen.
    auto rk4 = [&](double& s, double& v, double h) {
        const double s2 = s + 0.5 * h * v;
        const double k1s = v, k1v = accel(s, v);
        const double k2s = v + 0.5 * h * k1v, k2v = accel(s2, v + 0.5 * h * k1v);
        const double s3 = s + 0.5 * h * k2s;
        const double k3s = v + 0.5 * h * k2v, k3v = accel(s3, v + 0.5 * h * k2v);
        const double s4 = s + h * k3s;
        const double k4s = v + h * k3v, k4v = accel(s4, v + h * k3v);
        const double s0 = s;
        s += h / 6 * (k1s + 2 * k2s + 2 * k3s + k4s);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        return std::make_pair(std::min({s0, s2, s3, s4, s}), std::max({s0, s2, s3, s4, s}));
    };
    // V' may jump at breakpoints; steps that cross one are bisected so the
    // kink costs O(h_min) instead of O(dt).
    const auto& breaks = V.breaks();
    auto crosses = [&](double a, double b) {
        if (a > b) std::swap(a, b);
        const auto it = std::upper_bound(breaks.begin(), breaks.end(), a);
        return it != breaks.end() && *it < b;
    };
    auto step = [&](auto&& self, double& s, double& v, double h) -> void {
        double s1 = s, v1 = v;
        const auto [lo, hi] = rk4(s1, v1, h);
        if (h > 1e-10 && crosses(lo, hi)) {
            self(self, s, v, 0.5 * h);
            self(self, s, v, 0.5 * h);
            return;
        }
        s = s1;
        v = v1;
    };
    std::vector<CurveState> out{{s0, v0}};
    double s = s0, v = v0, t = times.front();
    for (std::size_t j = 1; j < times.size(); ++j) {
        const int steps = static_cast<int>(std::ceil((times[j] - t) / dt));
        const double h = (times[j] - t) / steps;
        for (int i = 0; i < steps; ++i) step(step, s, v, h);
        t = times[j];
        out.push_back({s, v});
    }
    return out;
}

/// Dense brute-force squared distance to a curve.
inline double brute_distance2(const geometry::ScratchCurve& c, const Vec& q, int n = 200000) {
    double best = 1e300;
    for (int i = 0; i <= n; ++i) best = std::min(best, norm2(c.point(double(i) / n) - q));
    return best;
}

/// Random timing conditions on a curve: knots as checkpoint parameters,
/// speeds inside the monotone band.
inline scratch::TimingConditions random_timing(Rng& rng,
                                                           const geometry::ScratchCurve& c) {
    scratch::TimingConditions tc;
    const std::size_t K = c.knot_count();
    double t = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
        tc.times.push_back(t);
        t += uniform(rng, 0.5, 1.5);
    }
    tc.s = c.knots();
    for (std::size_t j = 0; j < K; ++j) {
        double sec = 1e300;
        if (j > 0) sec = std::min(sec, (tc.s[j] - tc.s[j - 1]) / (tc.times[j] - tc.times[j - 1]));
        if (j + 1 < K) sec = std::min(sec, (tc.s[j + 1] - tc.s[j]) / (tc.times[j + 1] - tc.times[j]));
        tc.speeds.push_back(sec * uniform(rng, 0.3, 2.5));
    }
    return tc;
}

/// Smallest q for which some choice of integer numerators satisfies both
/// conditions, found by enumerating every numerator within 2 of q*alpha.
inline std::uint64_t exhaustive_smallest_q(const diophantine::ApproximationProblem& p) {
    const int n = p.n(), K = p.K();
    const long double e = 1.0L / (n * K);
    for (std::uint64_t q = 1; q <= p.Q; ++q) {
        const long double bound = 1.0L / (q * std::pow(static_cast<long double>(p.Q), e));
        bool all_groups = true;
        for (int r = 0; r < K && all_groups; ++r) {
            // Admissible numerators per index, then search for a combination hitting the sum.
            std::vector<std::vector<long long>> cand(n);
            for (int j = 0; j < n; ++j) {
                const long long c = static_cast<long long>(std::floor(q * static_cast<long double>(p.groups[r][j])));
                for (long long a = c - 2; a <= c + 2; ++a)
                    if (std::fabs(static_cast<long double>(p.groups[r][j]) - static_cast<long double>(a) / q) < bound)
                        cand[j].push_back(a);
            }
            bool found = false;
            std::vector<std::size_t> idx(n, 0);
            if (std::all_of(cand.begin(), cand.end(), [](const auto& v) { return !v.empty(); })) {
                while (true) {
                    long long s = 0;
                    for (int j = 0; j < n; ++j) s += cand[j][idx[j]];
                    if (static_cast<long long>(p.constraints[r].den) * s ==
                        static_cast<long long>(p.constraints[r].num) * static_cast<long long>(q)) {
                        found = true;
                        break;
                    }
                    int j = 0;
                    while (j < n && ++idx[j] == cand[j].size()) idx[j++] = 0;
                    if (j == n) break;
                }
            }
            all_groups = found;
        }
        if (all_groups) return q;
    }
    return 0;
}

/// Random group of n non-negative reals summing to A/B.
inline std::vector<double> random_group(Rng& rng, int n, const diophantine::Rational& c) {
    std::vector<double> w(n);
    for (auto& x : w) x = 0.05 + uniform01(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double target = static_cast<double>(c.num) / static_cast<double>(c.den);
    double s = 0;
    for (int j = 0; j + 1 < n; ++j) {
        w[j] *= target / total;
        s += w[j];
    }
    w[n - 1] = target - s;
    return w;
}

inline diophantine::ApproximationProblem random_problem(Rng& rng, int n, int K) {
    diophantine::ApproximationProblem p;
    std::int64_t maxB = 1;
    for (int r = 0; r < K; ++r) {
        const std::int64_t B = 1 + static_cast<std::int64_t>(rng() % 2);
        const std::int64_t A = B == 1 ? 1 : 1 + static_cast<std::int64_t>(rng() % 3);
        maxB = std::max(maxB, B);
        p.constraints.push_back({A, B});
        p.groups.push_back(random_group(rng, n, p.constraints.back()));
    }
    p.Q = diophantine::minimal_legal_Q(n, K, maxB);
    return p;
}

// Line-aligned cubature of U e^{-lambda d^2} around a 2-D segment: a strip
// along the segment plus two half-disk caps in polar coordinates.
inline double strip_oracle(const quantum::Potential& U, const Vec& a, const Vec& b, double lambda, double R) {
    const Vec e = normalized(b - a);
    const Vec n(-e[1], e[0], 0.0);
    const double L = norm(b - a);
    const double x4[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    const double w4[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    auto gauss = [&](double lo, double hi, int panels, auto&& fn) {
        double sum = 0.0;
        const double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p)
            for (int i = 0; i < 4; ++i) sum += 0.5 * h * w4[i] * fn(lo + h * (p + 0.5 + 0.5 * x4[i]));
        return sum;
    };
    const double strip = gauss(0.0, L, 200, [&](double u) {
        return gauss(-R, R, 200, [&](double v) { return U.value(a + u * e + v * n, 0) * std::exp(-lambda * v * v); });
    });
    double caps = 0.0;
    for (int side = 0; side < 2; ++side) {
        const Vec c = side == 0 ? a : b;
        const double sgn = side == 0 ? -1.0 : 1.0;
        caps += gauss(0.0, R, 200, [&](double r) {
            return r * std::exp(-lambda * r * r) * gauss(-M_PI / 2, M_PI / 2, 64, [&](double th) {
                return U.value(c + r * (sgn * std::cos(th) * e + std::sin(th) * n), 0);
            });
        });
    }
    return strip + caps;
}


/// Composite 4-point Gauss-Legendre rule on [lo, hi].
template <class F>
double gauss_panels(double lo, double hi, int panels, F&& fn) {
    const double x4[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    const double w4[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    double sum = 0.0;
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p)
        for (int i = 0; i < 4; ++i) sum += 0.5 * h * w4[i] * fn(lo + h * (p + 0.5 + 0.5 * x4[i]));
    return sum;
}

// Cylinder-aligned cubature of U e^{-lambda d^2} around a 3-D segment: a
// cylinder in polar cross-section plus two hemispherical caps.
inline double cylinder_oracle(const quantum::Potential& U, const Vec& a, const Vec& b, double lambda, double R,
                              int panels = 40) {
    const Vec e = normalized(b - a);
    const Vec seed = std::fabs(e[0]) < 0.9 ? Vec(1, 0, 0) : Vec(0, 1, 0);
    const Vec n1 = normalized(seed - dot(seed, e) * e);
    const Vec n2 = cross(e, n1);
    const double L = norm(b - a);
    const double body = gauss_panels(0.0, L, panels, [&](double u) {
        return gauss_panels(0.0, R, panels, [&](double r) {
            return r * std::exp(-lambda * r * r) * gauss_panels(0.0, 2 * M_PI, 16, [&](double th) {
                       return U.value(a + u * e + r * (std::cos(th) * n1 + std::sin(th) * n2), 0);
                   });
        });
    });
    double caps = 0.0;
    for (int side = 0; side < 2; ++side) {
        const Vec c = side == 0 ? a : b;
        const double sgn = side == 0 ? -1.0 : 1.0;
        // Polar angle from the outward axis, 0..pi/2.
        caps += gauss_panels(0.0, R, panels, [&](double r) {
            return r * r * std::exp(-lambda * r * r) * gauss_panels(0.0, M_PI / 2, 16, [&](double th) {
                       return std::sin(th) * gauss_panels(0.0, 2 * M_PI, 16, [&](double ph) {
                                  const Vec dir = sgn * std::cos(th) * e +
                                                  std::sin(th) * (std::cos(ph) * n1 + std::sin(ph) * n2);
                                  return U.value(c + r * dir, 0);
                              });
                   });
        });
    }
    return body + caps;
}

}  // namespace scratchsim::acceptance::oracle
