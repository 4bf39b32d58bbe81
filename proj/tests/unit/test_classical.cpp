#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"
#include "scratchsim/classical/ensemble.hpp"
#include "scratchsim/error.hpp"
#include "scratchsim/random.hpp"
#include "scratchsim/scratch/scratched.hpp"
#include "scratchsim/scratch/tangential.hpp"

using namespace scratchsim;
using namespace scratchsim::classical;
using geometry::ScratchCurve;

namespace {

std::shared_ptr<const quantum::Potential> zero(int dim) {
    return std::make_shared<quantum::HarmonicPotential>(dim, Vec(), Vec(), 0.0);
}

ClassicalEnsemble single(int dim, const Vec& q, const Vec& p, double m = 1.0) {
    ClassicalEnsemble e;
    e.dim = dim;
    e.mass = m;
    e.particles.push_back({q, p, 0});
    return e;
}

struct SweepResult {
    double deviation;
    double drift;
};

// Particle on the straight scratch a -> b with p = m (b - a) / T plus a
// transverse kick of relative size `kick`.
SweepResult run_line(double lambda, double kick) {
    auto U = std::make_shared<quantum::HarmonicPotential>(2, Vec(0.4, 0.3), Vec(0.5, -1.0), 1.0);
    const auto line = ScratchCurve::line(2, Vec(-3, -1), Vec(3, 2));
    const scratch::ScratchedPotential pot(U, {line}, lambda);
    // The particle crosses the interior of the scratch and stays clear of the
    // end caps.
    auto e = initialize_lines({ScratchCurve::line(2, line.point(0.05), line.point(0.95))}, 1.0, 0.0, 2.0);
    const Vec d = normalized(line.point(1.0) - line.point(0.0));
    e.particles[0].p += (kick * norm(e.particles[0].p)) * Vec(-d[1], d[0]);
    IntegrationOptions opt;
    opt.max_step = stiffness_step(lambda, 12.0, 1.0);
    opt.lambda = lambda;
    const std::vector<ScratchCurve> curves{line};
    const auto r = integrate(e, pot, {0.0, 1.0, 2.0}, opt, &curves);
    return {r.max_deviation[0], r.max_energy_drift};
}

}  // namespace

TEST_CASE("initialization") {
    SUBCASE("line mode momentum") {
        const auto e = initialize_lines({ScratchCurve::line(2, Vec(0, 0), Vec(1, 1))}, 1.0, 0.0, 1.0);
        CHECK(e.particles[0].q == Vec(0, 0));
        CHECK(e.particles[0].p[0] == doctest::Approx(1.0));
        CHECK(e.particles[0].p[1] == doctest::Approx(1.0));
        const auto e2 = initialize_lines({ScratchCurve::line(2, Vec(1, 2), Vec(4, -2))}, 2.0, 1.0, 3.0);
        CHECK(e2.particles[0].p[0] == doctest::Approx(3.0));
        CHECK(e2.particles[0].p[1] == doctest::Approx(-4.0));
    }
    SUBCASE("zero-length itinerary") {
        CHECK_THROWS_AS(initialize_lines({ScratchCurve::line(2, Vec(1, 1), Vec(1, 1))}, 1.0, 0.0, 1.0), DomainError);
        CHECK_THROWS_AS(initialize_lines({}, 1.0, 0.0, 1.0), DomainError);
        CHECK_THROWS_AS(initialize_lines({ScratchCurve::line(2, Vec(0, 0), Vec(1, 1))}, 1.0, 1.0, 1.0), DomainError);
    }
    SUBCASE("spline mode speed") {
        const auto c = ScratchCurve::clamped_spline(3, {Vec(-2, 0, 0), Vec(0, 1, 0.5), Vec(2, 0, 1)});
        geometry::MomentumConditioning mc;
        mc.speed = {{0.7, 0.9, 0.4}};
        mc.region = {{1, 1, 1}};
        mc.direction = {{Vec(), Vec(), Vec()}};
        const auto e = initialize_on_scratches({c}, mc, 1.3);
        CHECK(e.particles[0].q == c.point(0.0));
        CHECK(std::fabs(norm(e.particles[0].p) / 1.3 - 0.7 * norm(c.derivative(0.0))) < 1e-12);
        CHECK_THROWS_AS(initialize_on_scratches({c, c}, mc, 1.0), DomainError);
    }
}

TEST_CASE("free motion is exact") {
    Rng rng(5);
    ClassicalEnsemble e;
    e.dim = 3;
    e.mass = 0.7;
    for (std::size_t i = 0; i < 10; ++i)
        e.particles.push_back({Vec(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)),
                               Vec(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)), i});
    IntegrationOptions opt;
    opt.max_step = 1e-2;
    const auto r = integrate(e, *zero(3), {0.0, 0.5, 1.0}, opt);
    REQUIRE(r.snapshots.size() == 3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < e.size(); ++i) {
            const Vec expected = e.particles[i].q + (0.5 * j / e.mass) * e.particles[i].p;
            CHECK(norm(r.snapshots[j][i].q - expected) < 1e-12);
            CHECK(r.snapshots[j][i].p == e.particles[i].p);
        }
    CHECK(r.steps == 100);
}

TEST_CASE("harmonic period") {
    const double k = 2.0, m = 1.5;
    const double period = 2 * M_PI * std::sqrt(m / k);
    auto U = std::make_shared<quantum::HarmonicPotential>(2, Vec(k, 0.0), Vec(), 0.0);
    // 2-D ensemble, motion along x only.
    const auto e = single(2, Vec(1, 0), Vec(0, 0), m);
    IntegrationOptions opt;
    opt.max_step = period / 4000;
    opt.record_every = 1;
    const auto r = integrate(e, *U, {0.0, 5.2 * period}, opt);
    // Upward zero crossings of p, linearly interpolated.
    std::vector<double> crossings;
    for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
        const auto& a = r.trajectory[i - 1];
        const auto& b = r.trajectory[i];
        if (a.p[0] < 0.0 && b.p[0] >= 0.0) crossings.push_back(a.t + (b.t - a.t) * (-a.p[0]) / (b.p[0] - a.p[0]));
    }
    REQUIRE(crossings.size() == 5);
    const double measured = (crossings.back() - crossings.front()) / 4.0;
    CHECK(std::fabs(measured / period - 1.0) < 1e-4);
}

TEST_CASE("constraint to a straight scratch") {
    const double h = 16.0 / 256.0;
    SUBCASE("tangent start stays on the line to rounding") {
        for (double lambda : {1e2, 1e3, 1e4, 1e5}) {
            const auto r = run_line(lambda, 0.0);
            CHECK(r.deviation < 1e-12);
            CHECK(r.drift < 1e-6);
        }
    }
    SUBCASE("transverse kick: deviation decays with lambda") {
        std::vector<double> dev;
        for (double lambda : {1e2, 1e3, 1e4, 1e5}) {
            const auto r = run_line(lambda, 1e-3);
            INFO("lambda " << lambda << " deviation " << r.deviation << " drift " << r.drift);
            CHECK(r.drift < 1e-6);
            if (!dev.empty()) CHECK(r.deviation <= 1.05 * dev.back());
            dev.push_back(r.deviation);
        }
        CHECK(dev.back() < h / 10);
        CHECK(dev.back() > 0.0);
    }
}

TEST_CASE("timing along a curved scratch") {
    const auto c = ScratchCurve::clamped_spline(3, {Vec(-2, 0, 0), Vec(0, 1.5, 0.5), Vec(2, 0, 1)});
    const scratch::TimingConditions tc{{0.0, 0.8, 1.7}, c.knots(), {0.7, 1.0, 0.6}};
    const double m = 1.0;
    auto V = scratch::construct_tangential_potential(c, tc, m);
    auto U = std::make_shared<quantum::HarmonicPotential>(3, Vec(0.2, 0.2, 0.2), Vec(), 1.0);
    double excess = -1e300;
    for (int i = 0; i <= 1000; ++i) excess = std::max(excess, V.value(i / 1000.0) - U->value(c.point(i / 1000.0), 0));
    V.shift(-(excess + 1.0));
    geometry::MomentumConditioning mc;
    mc.speed = {tc.speeds};
    for (double lambda : {1e4, 1e5}) {
        const scratch::ScratchedPotential pot(U, {c}, lambda, {V});
        const auto e = initialize_on_scratches({c}, mc, m);
        IntegrationOptions opt;
        opt.max_step = stiffness_step(lambda, 10.0, m) / 4;
        const std::vector<ScratchCurve> curves{c};
        const auto r = integrate(e, pot, tc.times, opt, &curves);
        const scratch::ScratchProfile prof(c);
        for (std::size_t j = 0; j < tc.times.size(); ++j) {
            const auto& ps = r.snapshots[j][0];
            const auto proj = prof.project(ps.q);
            const double speed = dot(ps.p, c.derivative(proj.s)) / (m * norm2(c.derivative(proj.s)));
            INFO("lambda " << lambda << " j " << j);
            CHECK(std::fabs(proj.s - tc.s[j]) < 1e-3);
            CHECK(std::fabs(speed - tc.speeds[j]) / tc.speeds[j] < 1e-2);
        }
        CHECK(r.max_energy_drift < 1e-6);
    }
}

TEST_CASE("particles are independent") {
    Rng rng(11);
    auto U = std::make_shared<quantum::HarmonicPotential>(2, Vec(0.3, 0.5), Vec(0.1, 0.2), 1.0);
    std::vector<ScratchCurve> lines;
    for (int i = 0; i < 5; ++i)
        lines.push_back(ScratchCurve::line(2, Vec(-3.0 + i, uniform(rng, -2, -1)), Vec(-2.5 + i, uniform(rng, 1, 2))));
    const scratch::ScratchedPotential pot(U, lines, 1e3);
    auto e = initialize_lines(lines, 1.0, 0.0, 1.0);
    for (auto& p : e.particles) p.p += Vec(0.01, -0.02);
    IntegrationOptions opt;
    opt.max_step = 2e-3;
    const auto a = integrate(e, pot, {0.0, 1.0}, opt);
    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    ClassicalEnsemble shuffled = e;
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled.particles[i] = e.particles[perm[i]];
    const auto b = integrate(shuffled, pot, {0.0, 1.0}, opt);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(b.snapshots.back()[i].id == perm[i]);
        CHECK(b.snapshots.back()[i].q == a.snapshots.back()[perm[i]].q);
        CHECK(b.snapshots.back()[i].p == a.snapshots.back()[perm[i]].p);
    }
}

TEST_CASE("energy stays bounded over long runs") {
    auto U = std::make_shared<quantum::HarmonicPotential>(2, Vec(0.4, 0.3), Vec(0.5, -1.0), 1.0);
    const auto line = ScratchCurve::line(2, Vec(-3, -1), Vec(3, 2));
    const double lambda = 1e3;
    const scratch::ScratchedPotential pot(U, {line}, lambda);
    auto e = single(2, line.point(0.5) + Vec(0.01, -0.01), Vec(0.05, 0.02));
    IntegrationOptions opt;
    opt.max_step = stiffness_step(lambda, 12.0, 1.0) / 8;
    opt.energy_tolerance = 0.0;
    opt.record_every = 1;
    const auto r = integrate(e, pot, {0.0, 20.0}, opt);
    const double e0 = r.initial_energy[0];
    double first = 0.0, last = 0.0;
    const std::size_t n = r.trajectory.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(r.trajectory[i].energy - e0) / std::fabs(e0);
        if (i < n / 10) first = std::max(first, d);
        if (i >= n - n / 10) last = std::max(last, d);
    }
    CHECK(first < 1e-3);
    CHECK(last <= 2.0 * first);
}

TEST_CASE("failure modes") {
    auto U = std::make_shared<quantum::HarmonicPotential>(2, Vec(0.4, 0.3), Vec(), 1.0);
    const auto line = ScratchCurve::line(2, Vec(-3, -1), Vec(3, 2));
    SUBCASE("energy drift names the step and lambda") {
        const scratch::ScratchedPotential pot(U, {line}, 1e4);
        auto e = single(2, line.point(0.5) + Vec(0.001, -0.001), Vec(1, 0.5));
        IntegrationOptions opt;
        opt.max_step = 0.05;
        opt.lambda = 1e4;
        try {
            integrate(e, pot, {0.0, 1.0}, opt);
            FAIL("expected a stability error");
        } catch (const StabilityError& err) {
            const std::string what = err.what();
            CHECK(what.find("dt = 0.05") != std::string::npos);
            CHECK(what.find("lambda = 10000") != std::string::npos);
        }
    }
    SUBCASE("leaving the box") {
        auto e = single(2, Vec(0, 0), Vec(5, 0));
        IntegrationOptions opt;
        opt.confine = true;
        opt.box_lo = Vec(-1, -1);
        opt.box_hi = Vec(1, 1);
        CHECK_THROWS_AS(integrate(e, *zero(2), {0.0, 1.0}, opt), ConfinementError);
    }
    SUBCASE("pair too close") {
        ClassicalEnsemble e;
        e.dim = 2;
        e.particles = {{Vec(-1, 0), Vec(1, 0), 0}, {Vec(1, 0), Vec(-1, 0), 1}};
        IntegrationOptions opt;
        opt.min_pair_distance = 0.1;
        CHECK_THROWS_AS(integrate(e, *zero(2), {0.0, 2.0}, opt), ConfinementError);
        opt.min_pair_distance = 0.0;
        const auto r = integrate(e, *zero(2), {0.0, 2.0}, opt);
        CHECK(r.min_pair_distance < 1e-9);
    }
    SUBCASE("bad schedules") {
        auto e = single(2, Vec(0, 0), Vec(1, 0));
        CHECK_THROWS_AS(integrate(e, *zero(2), {0.0}, {}), DomainError);
        CHECK_THROWS_AS(integrate(e, *zero(2), {1.0, 0.0}, {}), DomainError);
    }
}

TEST_CASE("stiffness step") {
    CHECK(stiffness_step(100.0, 2.0, 1.0) == doctest::Approx(2 * M_PI / 20 / 20.0));
    CHECK_THROWS_AS(stiffness_step(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("pairwise distance sweep") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec> pts;
        const int n = 2 + int(rng() % 60);
        for (int i = 0; i < n; ++i) pts.push_back(Vec(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)));
        double brute = 1e300;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) brute = std::min(brute, norm(pts[i] - pts[j]));
        CHECK(min_pairwise_distance(pts) == brute);
    }
}

TEST_CASE("occupancy") {
    const auto pos = grid::RegionPartition::half_spaces(2, grid::Space::position, 0);
    const auto mom = grid::RegionPartition::half_spaces(2, grid::Space::momentum, 1);
    std::vector<std::vector<ParticleState>> snaps{
        {{Vec(-1, 0), Vec(0, 1), 0}, {Vec(-2, 1), Vec(0, 2), 1}},
        {{Vec(-1, 0), Vec(0, -1), 0}, {Vec(2, 1), Vec(0, 2), 1}},
    };
    const auto rec = occupancy(snaps, pos, &mom);
    CHECK(rec.pi[0] == std::vector<double>{1.0, 0.0});
    CHECK(rec.pi[1] == std::vector<double>{0.5, 0.5});
    CHECK(rec.pi_tilde[0] == std::vector<double>{0.0, 1.0});
    CHECK(rec.pi_tilde[1] == std::vector<double>{0.5, 0.5});
    for (const auto& row : rec.pi) CHECK(std::accumulate(row.begin(), row.end(), 0.0) == 1.0);
    const std::string csv = occupancy_csv(rec, {0.0, 1.0});
    CHECK(csv.rfind("t_j,k,pi_k,pi_tilde_k,count,count_tilde\n0,1,1,0,2,0\n", 0) == 0);
    const std::string traj = trajectory_csv({{0.5, 3, Vec(1, 2), Vec(3, 4), 5}}, 2);
    CHECK(traj == "t,l,q1,q2,p1,p2,E\n0.5,3,1,2,3,4,5\n");
}
