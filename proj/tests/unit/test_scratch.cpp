#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "scratchsim/error.hpp"
#include "scratchsim/geometry/curve.hpp"
#include "scratchsim/grid/grid.hpp"
#include "scratchsim/quantum/potential.hpp"
#include "scratchsim/random.hpp"
#include "scratchsim/scratch/profile.hpp"
#include "scratchsim/scratch/scratched.hpp"
#include "scratchsim/scratch/tangential.hpp"
#include "support/oracles.hpp"

using namespace scratchsim;
using namespace scratchsim::scratch;
using geometry::ScratchCurve;

namespace {

std::shared_ptr<const quantum::Potential> smooth_positive(int dim) {
    return std::make_shared<quantum::HarmonicPotential>(dim, Vec(0.3, 0.5, 0.4), Vec(0.2, -0.1, 0.0), 1.0);
}

ScratchCurve helix(double turns = 1.0) {
    std::vector<Vec> pts;
    for (int i = 0; i <= 8; ++i) {
        const double a = 2 * M_PI * turns * i / 8.0;
        pts.push_back(Vec(2 * std::cos(a), 2 * std::sin(a), 0.8 * a));
    }
    return ScratchCurve::clamped_spline(3, pts);
}

Vec random_unit_perp(Rng& rng, const Vec& t, int dim) {
    while (true) {
        Vec v(uniform(rng, -1, 1), uniform(rng, -1, 1), dim == 3 ? uniform(rng, -1, 1) : 0.0);
        v -= dot(v, normalized(t)) * normalized(t);
        if (norm(v) > 1e-3) return normalized(v);
    }
}

}  // namespace

TEST_CASE("profile projection") {
    const auto c = helix();
    const ScratchProfile prof(c);
    Rng rng(1);
    SUBCASE("points on the curve") {
        for (int i = 0; i < 200; ++i) {
            const double s = uniform01(rng);
            const auto p = prof.project(c.point(s));
            CHECK(p.f < 1e-24);
            CHECK(norm(ScratchProfile::grad_f(p)) < 1e-11);
            CHECK(std::fabs(p.s - s) < 1e-9);
        }
    }
    SUBCASE("off-curve points against brute force") {
        for (int i = 0; i < 100; ++i) {
            const double s = uniform(rng, 0.05, 0.95);
            const Vec q = c.point(s) + 0.3 * random_unit_perp(rng, c.derivative(s), 3);
            const auto p = prof.project(q);
            CHECK(p.f == doctest::Approx(oracle::brute_distance2(c, q, 100000)).epsilon(1e-6));
            CHECK(p.f > 0.0);
        }
    }
    SUBCASE("on-curve Hessian of f") {
        for (int i = 0; i < 50; ++i) {
            const double s = uniform(rng, 0.01, 0.99);
            Projection p;
            p.s = s;
            p.point = c.point(s);
            const auto sp = symmetric_spectrum(prof.hess_f(p), 3, c.derivative(s));
            CHECK(std::fabs(sp.eigenvalues[0]) < 1e-12);
            CHECK(sp.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(sp.eigenvalues[2] == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(sp.tangent_alignment >= 1 - 1e-6);
        }
    }
    SUBCASE("grad sigma and Hessian of f against finite differences") {
        for (int i = 0; i < 50; ++i) {
            const double s = uniform(rng, 0.1, 0.9);
            const Vec q = c.point(s) + 0.2 * random_unit_perp(rng, c.derivative(s), 3);
            const auto p = prof.project(q);
            const Mat3 h = prof.hess_f(p);
            const Vec gs = prof.grad_sigma(p);
            const double e = 1e-5;
            for (int a = 0; a < 3; ++a) {
                Vec qp = q, qm = q;
                qp[a] += e;
                qm[a] -= e;
                const auto pp = prof.project(qp), pm = prof.project(qm);
                CHECK((pp.s - pm.s) / (2 * e) == doctest::Approx(gs[a]).epsilon(1e-5).scale(1e-3));
                const Vec col = (ScratchProfile::grad_f(pp) - ScratchProfile::grad_f(pm)) * (0.5 / e);
                for (int b = 0; b < 3; ++b) CHECK(col[b] == doctest::Approx(h(b, a)).epsilon(1e-5).scale(1e-3));
            }
        }
    }
    SUBCASE("clamped endpoint") {
        const Vec q = c.point(0.0) - 0.5 * normalized(c.derivative(0.0));
        const auto p = prof.project(q);
        CHECK(p.s == 0.0);
        CHECK(p.clamped);
        CHECK(p.f == doctest::Approx(0.25));
        const Mat3 h = prof.hess_f(p);
        CHECK(h(0, 0) == 2.0);
        CHECK(h(0, 1) == 0.0);
    }
}

TEST_CASE("scratched potential evaluation") {
    const auto base = smooth_positive(2);
    const auto line = ScratchCurve::line(2, Vec(-3, -1), Vec(4, 2));
    Rng rng(2);

    SUBCASE("on the scratch value and gradient vanish") {
        const ScratchedPotential pot(base, {line}, 10.0);
        for (int i = 0; i < 200; ++i) {
            const auto e = pot.eval(line.point(uniform01(rng)));
            CHECK(std::fabs(e.value) < 1e-12);
            CHECK(norm(e.gradient) < 1e-12);
        }
    }
    SUBCASE("force-free scratches relative to the base gradient") {
        const auto g = grid::SpatialGrid::cube(2, 101, -5.0, 5.0);
        double max_base = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) max_base = std::max(max_base, norm(base->gradient(g.point(i), 0)));
        const auto curved = ScratchCurve::clamped_spline(2, {Vec(-3, 0), Vec(0, 2), Vec(3, -1)});
        for (double lambda : {1e2, 1e3, 1e4}) {
            const ScratchedPotential pot(base, {line, curved}, lambda);
            double worst = 0.0;
            for (int i = 0; i <= 2000; ++i)
                for (const auto* c : {&line, &curved}) worst = std::max(worst, norm(pot.gradient(c->point(i / 2000.0), 0)));
            INFO("lambda " << lambda);
            CHECK(worst <= 1e-10 * max_base);
        }
    }
    SUBCASE("closed form at f = 1") {
        const ScratchedPotential pot(base, {line}, 10.0);
        const double s = 0.4;
        const Vec q = line.point(s) + random_unit_perp(rng, line.derivative(s), 2);
        CHECK(pot.value(q, 0) == doctest::Approx(base->value(q, 0) * (1 - std::exp(-10.0))).epsilon(1e-13));
        CHECK(1 - std::exp(-10.0) == doctest::Approx(0.9999546).epsilon(1e-7));
    }
    SUBCASE("gradient matches central differences") {
        const auto c3 = helix();
        TimingConditions tc{{0.0, 1.0, 2.0}, {}, {}};
        tc.times = std::vector<double>(c3.knot_count());
        for (std::size_t j = 0; j < tc.times.size(); ++j) tc.times[j] = 0.5 * j;
        tc.s = c3.knots();
        for (std::size_t j = 0; j < tc.times.size(); ++j) tc.speeds.push_back(0.3);
        const auto V = construct_tangential_potential(c3, tc, 1.0);
        for (bool modified : {false, true}) {
            const ScratchedPotential pot(smooth_positive(3), {c3}, 50.0,
                                         modified ? std::vector<TangentialPotential>{V} : std::vector<TangentialPotential>{});
            for (int i = 0; i < 100; ++i) {
                const double s = uniform(rng, 0.05, 0.95);
                const double r = uniform(rng, 0.02, 0.6);
                const Vec q = c3.point(s) + r * random_unit_perp(rng, c3.derivative(s), 3);
                const auto e = pot.eval(q);
                const double h = 1e-6;
                for (int a = 0; a < 3; ++a) {
                    Vec qp = q, qm = q;
                    qp[a] += h;
                    qm[a] -= h;
                    const double fd = (pot.value(qp, 0) - pot.value(qm, 0)) / (2 * h);
                    CHECK(fd == doctest::Approx(e.gradient[a]).epsilon(1e-6).scale(std::max(1.0, norm(e.gradient))));
                }
            }
        }
    }
    SUBCASE("flush to base outside the tube") {
        const ScratchedPotential pot(base, {line}, 100.0);
        CHECK(pot.tube_radius() * pot.tube_radius() * 100.0 == doctest::Approx(40.0));
        for (int i = 0; i < 100; ++i) {
            const double s = uniform01(rng);
            const Vec q = line.point(s) + (pot.tube_radius() * uniform(rng, 1.0001, 3.0)) *
                                              random_unit_perp(rng, line.derivative(s), 2);
            if (ScratchProfile(line).f(q) <= pot.tube_radius() * pot.tube_radius()) continue;
            const auto e = pot.eval(q);
            CHECK(e.value == base->value(q, 0));
            CHECK(e.gradient == base->gradient(q, 0));
        }
        // Just inside: the flushed term is below e^{-40} relative.
        const Vec q = line.point(0.5) + (pot.tube_radius() * 0.9999) * random_unit_perp(rng, line.derivative(0.5), 2);
        CHECK(std::fabs(pot.value(q, 0) - base->value(q, 0)) / base->value(q, 0) < 1e-16 * 1e1);
    }
    SUBCASE("restoring force toward the scratch") {
        const auto c3 = helix();
        const ScratchedPotential pot(smooth_positive(3), {c3}, 1e3);
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const double s = uniform(rng, 0.01, 0.99);
            const Vec d = uniform(rng, 1e-4, 1e-2) * random_unit_perp(rng, c3.derivative(s), 3);
            if (!(dot(pot.gradient(c3.point(s) + d, 0), d) > 0.0)) ++bad;
        }
        CHECK(bad == 0);
    }
    SUBCASE("invalid construction") {
        CHECK_THROWS_AS(ScratchedPotential(base, {line}, 0.0), DomainError);
        CHECK_THROWS_AS(ScratchedPotential(base, {line}, -1.0), DomainError);
        CHECK_THROWS_AS(ScratchedPotential(base, {line}, 10.0, {}, 10.0), DomainError);
        CHECK_THROWS_AS(ScratchedPotential(nullptr, {line}, 10.0), DomainError);
    }
}

TEST_CASE("grid sampling agrees with pointwise evaluation") {
    const auto g = grid::SpatialGrid::cube(2, 64, -5.0, 5.0);
    const auto base = smooth_positive(2);
    const auto line = ScratchCurve::line(2, Vec(-3, -1.1), Vec(4, 2.3));
    const ScratchedPotential pot(base, {line, ScratchCurve::line(2, Vec(-2, 3), Vec(3, -4))}, 30.0);
    const ScratchSampler sampler(pot, g);
    const auto f = sampler.sample();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::fabs(f[i] - pot.value(g.point(i), 0)));
    CHECK(worst < 1e-13);
    const ScratchedPotential none(base, {}, 30.0);
    const auto u = ScratchSampler(none, g).sample();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(u[i] == base->value(g.point(i), 0));
}

TEST_CASE("hessian_on_scratch") {
    SUBCASE("straight scratch along x with U = 1") {
        auto one = std::make_shared<quantum::HarmonicPotential>(3, Vec(0, 0, 0), Vec(), 1.0);
        const ScratchedPotential pot(one, {ScratchCurve::line(3, Vec(-2, 0, 0), Vec(2, 0, 0))}, 50.0);
        const auto sp = hessian_on_scratch(pot, 0, 0.3);
        CHECK(std::fabs(sp.eigenvalues[0]) < 1e-12);
        CHECK(sp.eigenvalues[1] == doctest::Approx(100.0));
        CHECK(sp.eigenvalues[2] == doctest::Approx(100.0));
        CHECK(std::fabs(sp.null_vector[0]) == doctest::Approx(1.0));
    }
    SUBCASE("helix: finite-difference Hessian has the analytic structure") {
        const auto c = helix();
        const auto base = smooth_positive(3);
        Rng rng(4);
        for (int i = 0; i < 20; ++i) {
            const double s = uniform(rng, 0.05, 0.95);
            const ScratchedPotential pot(base, {c}, 200.0);
            const auto analytic = hessian_on_scratch(pot, 0, s);
            const auto fd = symmetric_spectrum(pot.hessian(c.point(s), 0), 3, c.derivative(s));
            CHECK(fd.null_ratio < 1e-4);
            CHECK(fd.tangent_alignment > 0.999);
            CHECK(fd.eigenvalues[1] > 0.0);
            for (int k = 1; k < 3; ++k) CHECK(fd.eigenvalues[k] == doctest::Approx(analytic.eigenvalues[k]).epsilon(1e-3));
            const auto doubled = hessian_on_scratch(pot.with_lambda(400.0), 0, s);
            for (int k = 1; k < 3; ++k)
                CHECK(doubled.eigenvalues[k] / analytic.eigenvalues[k] == doctest::Approx(2.0).epsilon(0.02));
            CHECK(analytic.eigenvalues[1] == doctest::Approx(2 * 200.0 * base->value(c.point(s), 0)));
        }
    }
    SUBCASE("another scratch inside the tube") {
        const auto base = smooth_positive(3);
        const ScratchedPotential pot(base,
                                     {ScratchCurve::line(3, Vec(-2, 0, 0), Vec(2, 0, 0)),
                                      ScratchCurve::line(3, Vec(0, -2, 0.05), Vec(0, 2, 0.05))},
                                     10.0);
        CHECK_THROWS_AS(hessian_on_scratch(pot, 0, 0.5), InterferenceError);
        CHECK_NOTHROW(hessian_on_scratch(pot.with_lambda(1e5), 0, 0.5));
    }
}

TEST_CASE("tangential potential construction") {
    SUBCASE("uniform motion needs no force") {
        const auto line = ScratchCurve::line(3, Vec(0, 0, 0), Vec(2, 1, 0));
        const TimingConditions tc{{0.0, 0.5, 2.0}, {0.0, 0.25, 1.0}, {0.5, 0.5, 0.5}};
        const auto V = construct_tangential_potential(line, tc, 1.3);
        for (int i = 0; i <= 100; ++i) {
            CHECK(std::fabs(V.value(i / 100.0)) < 1e-12);
            CHECK(std::fabs(V.derivative(i / 100.0)) < 1e-12);
        }
    }
    SUBCASE("two checkpoints with different speeds on a line") {
        const auto line = ScratchCurve::line(3, Vec(0, 0, 0), Vec(3, 0, 0));
        const TimingConditions tc{{0.0, 1.0}, {0.0, 1.0}, {0.6, 1.5}};
        const double m = 2.0;
        const auto V = construct_tangential_potential(line, tc, m);
        CHECK(V.value(0.0) == 0.0);
        const auto traj = oracle::integrate_lagrange(line, V, m, tc.times, 0.0, 0.6, 1e-4);
        CHECK(std::fabs(traj[1].s - 1.0) < 1e-4);
        CHECK(std::fabs(traj[1].sdot - 1.5) / 1.5 < 1e-3);
    }
    SUBCASE("curved spline with three checkpoints") {
        const auto c = ScratchCurve::clamped_spline(3, {Vec(-2, 0, 0), Vec(0, 1.5, 0.5), Vec(2, 0, 1)});
        const TimingConditions tc{{0.0, 0.7, 1.6}, c.knots(), {0.8, 1.1, 0.7}};
        const auto V = construct_tangential_potential(c, tc, 1.0);
        const auto traj = oracle::integrate_lagrange(c, V, 1.0, tc.times, 0.0, 0.8, 1e-4);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::fabs(traj[j].s - tc.s[j]) < 1e-4);
            CHECK(std::fabs(traj[j].sdot - tc.speeds[j]) / tc.speeds[j] < 1e-3);
        }
    }
    SUBCASE("round trip for random condition sets") {
        Rng rng(77);
        int failures = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const int K = 2 + static_cast<int>(rng() % 3);
            std::vector<Vec> pts;
            for (int j = 0; j < K; ++j) pts.push_back(Vec(2.0 * j + uniform(rng, -0.5, 0.5), uniform(rng, -1, 1), uniform(rng, -1, 1)));
            const auto c = ScratchCurve::clamped_spline(3, pts);
            const auto tc = oracle::random_timing(rng, c);
            const auto V = construct_tangential_potential(c, tc, 1.0);
            const auto traj = oracle::integrate_lagrange(c, V, 1.0, tc.times, tc.s[0], tc.speeds[0], 2e-4);
            for (int j = 0; j < K; ++j)
                if (std::fabs(traj[j].s - tc.s[j]) >= 1e-4 || std::fabs(traj[j].sdot - tc.speeds[j]) / tc.speeds[j] >= 1e-3)
                { ++failures; MESSAGE("trial " << trial << " j " << j << " ds " << traj[j].s - tc.s[j] << " dv " << (traj[j].sdot - tc.speeds[j]) / tc.speeds[j]); }
        }
        CHECK(failures == 0);
    }
    SUBCASE("infeasible timing") {
        const auto line = ScratchCurve::line(3, Vec(0, 0, 0), Vec(1, 0, 0));
        CHECK_THROWS_AS(construct_tangential_potential(line, {{0.0, 1.0}, {0.0, 1.0}, {3.5, 1.0}}, 1.0),
                        InfeasibleTimingError);
        CHECK_THROWS_AS(construct_tangential_potential(line, {{0.0, 1.0}, {0.0, 1.0}, {-1.0, 1.0}}, 1.0), DomainError);
        CHECK_THROWS_AS(construct_tangential_potential(line, {{0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, 1.0), DomainError);
    }
    SUBCASE("json round trip and shift") {
        const auto line = ScratchCurve::line(3, Vec(0, 0, 0), Vec(3, 0, 0));
        auto V = construct_tangential_potential(line, {{0.0, 1.0}, {0.0, 1.0}, {0.6, 1.5}}, 1.0);
        V.shift(-2.0);
        const auto W = TangentialPotential::from_json(V.to_json());
        for (double s : {0.0, 0.3, 0.77, 1.0}) {
            CHECK(W.value(s) == V.value(s));
            CHECK(W.derivative(s) == V.derivative(s));
        }
        CHECK(V.value(0.0) == -2.0);
    }
}
