#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "scratchsim/error.hpp"
#include "scratchsim/quantum/insensitivity.hpp"
#include "support/oracles.hpp"

using namespace scratchsim;
using namespace scratchsim::quantum;
using geometry::ScratchCurve;

using oracle::strip_oracle;

TEST_CASE("L1 difference for a straight scratch") {
    SUBCASE("2-D, constant U: closed form and slope") {
        const auto g = grid::SpatialGrid::cube(2, 64, -4.0, 4.0);
        auto one = std::make_shared<HarmonicPotential>(2, Vec(), Vec(), 1.0);
        const auto line = ScratchCurve::line(2, Vec(-2, -1), Vec(2, 1.5));
        const scratch::ScratchedPotential pot(one, {line}, 1.0);
        std::vector<double> lambdas{1e2, 1e3, 1e4}, l1;
        for (double lam : lambdas) {
            l1.push_back(scratch_l1_difference(pot.with_lambda(lam), g));
            const double exact = line.length() * std::sqrt(M_PI / lam) + M_PI / lam;
            CHECK(l1.back() == doctest::Approx(exact).epsilon(1e-8));
        }
        CHECK(std::fabs(log_log_slope(lambdas, l1) + 0.5) <= 0.15);
    }
    SUBCASE("2-D, harmonic U against line-aligned cubature") {
        const auto g = grid::SpatialGrid::cube(2, 64, -5.0, 5.0);
        auto U = std::make_shared<HarmonicPotential>(2, Vec(0.3, 0.7), Vec(0.4, -0.2), 1.5);
        const Vec a(-2.5, 0.3), b(1.7, -1.9);
        const scratch::ScratchedPotential pot(U, {ScratchCurve::line(2, a, b)}, 1.0);
        for (double lam : {1e2, 1e3, 1e4}) {
            const auto p = pot.with_lambda(lam);
            INFO("lambda " << lam << " diff " << scratch_l1_difference(p, g) - strip_oracle(*U, a, b, lam, p.tube_radius()));
            CHECK(scratch_l1_difference(p, g) ==
                  doctest::Approx(strip_oracle(*U, a, b, lam, p.tube_radius())).epsilon(1e-8));
        }
    }
    SUBCASE("3-D, constant U: closed form and slope") {
        const auto g = grid::SpatialGrid::cube(3, 16, -2.0, 2.0);
        auto one = std::make_shared<HarmonicPotential>(3, Vec(), Vec(), 2.0);
        const auto line = ScratchCurve::line(3, Vec(-0.4, -0.2, 0.3), Vec(0.4, 0.4, -0.2));
        const scratch::ScratchedPotential pot(one, {line}, 1.0);
        std::vector<double> lambdas{1e2, 1e3, 1e4}, l1;
        for (double lam : lambdas) {
            l1.push_back(scratch_l1_difference(pot.with_lambda(lam), g));
            const double exact = 2.0 * (line.length() * M_PI / lam + std::pow(M_PI / lam, 1.5));
            CHECK(l1.back() == doctest::Approx(exact).epsilon(1e-8));
        }
        CHECK(std::fabs(log_log_slope(lambdas, l1) + 1.0) <= 0.15);
    }
    SUBCASE("no scratches") {
        const auto g = grid::SpatialGrid::cube(2, 16, -1.0, 1.0);
        auto one = std::make_shared<HarmonicPotential>(2, Vec(), Vec(), 1.0);
        const scratch::ScratchedPotential none(one, {}, 1e6);
        CHECK(scratch_l1_difference(none, g) == 0.0);
        CHECK(scratch_linf_fourier(none, g) == 0.0);
    }
}

TEST_CASE("Fourier sup norm of the difference") {
    const auto g = grid::SpatialGrid::cube(2, 256, -4.0, 4.0);
    auto U = std::make_shared<HarmonicPotential>(2, Vec(0.2, 0.2), Vec(), 1.0);
    const scratch::ScratchedPotential pot(U, {ScratchCurve::line(2, Vec(-2, -1.03), Vec(2, 1.51))}, 100.0);
    // The difference is non-negative, so the sup sits at p = 0.
    const auto sampled = scratch::ScratchSampler(pot, g).sample();
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sum += U->value(g.point(i), 0) - sampled[i];
    const double dc = sum * g.cell_volume() / (2 * M_PI);
    CHECK(scratch_linf_fourier(pot, g) == doctest::Approx(dc).epsilon(1e-12));
    // Resolved tube: close to the continuum value.
    CHECK(scratch_linf_fourier(pot, g) == doctest::Approx(scratch_l1_difference(pot, g) / (2 * M_PI)).epsilon(1e-3));
}

TEST_CASE("decay table") {
    const auto g = grid::SpatialGrid::cube(2, 128, -6.0, 6.0);
    auto U = std::make_shared<HarmonicPotential>(2, Vec(0.25, 0.25), Vec(), 1.0);
    const QuantumSystem sys{g, 1.0, 1.0, U};
    const auto psi0 = gaussian_packet(g, Vec(-1, 0.3), 0.7, Vec(1.2, 0));
    const scratch::ScratchedPotential pot(U, {ScratchCurve::line(2, Vec(-3, -2.1), Vec(3, 1.9))}, 1.0);
    InsensitivityOptions opt;
    opt.propagation.max_step = 1e-2;
    const CheckpointSchedule sched{{0.0, 1.0}};

    SUBCASE("columns decrease while the tube is resolved") {
        const std::vector<double> lambdas{10.0, 30.0, 100.0, 300.0};
        const auto table = scratch_insensitivity(sys, pot, psi0, sched, lambdas, opt);
        REQUIRE(table.rows.size() == 4);
        CHECK(table.grid_floor_lambda == doctest::Approx(4.0 / (g.spacing(0) * g.spacing(0))));
        std::vector<double> l1, lf, l2;
        for (const auto& r : table.rows) {
            l1.push_back(r.l1_potential);
            lf.push_back(r.linf_fourier);
            l2.push_back(r.l2_wavefunction);
            CHECK(r.l2_wavefunction > 0.0);
        }
        CHECK(decays(lambdas, l1, 0.0, table.grid_floor_lambda));
        CHECK(decays(lambdas, lf, 0.05, table.grid_floor_lambda));
        CHECK(decays(lambdas, l2, 0.05, table.grid_floor_lambda));
        const std::string csv = table.to_csv();
        CHECK(csv.rfind("lambda,l1_potential,linf_fourier,l2_wavefunction\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    }
    SUBCASE("no scratches gives exact zeros") {
        const scratch::ScratchedPotential none(U, {}, 1.0);
        const auto table = scratch_insensitivity(sys, none, psi0, sched, {1e2, 1e4}, opt);
        for (const auto& r : table.rows) {
            CHECK(r.l1_potential == 0.0);
            CHECK(r.linf_fourier == 0.0);
            CHECK(r.l2_wavefunction == 0.0);
        }
    }
    SUBCASE("invalid lambda lists") {
        CHECK_THROWS_AS(scratch_insensitivity(sys, pot, psi0, sched, {0.0, 1.0}, opt), DomainError);
        CHECK_THROWS_AS(scratch_insensitivity(sys, pot, psi0, sched, {-5.0}, opt), DomainError);
        CHECK_THROWS_AS(scratch_insensitivity(sys, pot, psi0, sched, {10.0, 10.0}, opt), DomainError);
        CHECK_THROWS_AS(scratch_insensitivity(sys, pot, psi0, sched, {}, opt), DomainError);
    }
}

TEST_CASE("decay and slope helpers") {
    CHECK(decays({1, 2, 3}, {1.0, 1.04, 0.5}, 0.05, 10));
    CHECK_FALSE(decays({1, 2, 3}, {1.0, 1.06, 0.5}, 0.05, 10));
    CHECK(decays({1, 2, 3}, {1.0, 0.5, 9.0}, 0.05, 2));
    CHECK(log_log_slope({1, 10, 100}, {1.0, 0.1, 0.01}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(log_log_slope({1, 10}, {1.0, 0.0}), DomainError);
}
