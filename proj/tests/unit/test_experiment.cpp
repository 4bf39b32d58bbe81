#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "scratchsim/error.hpp"
#include "scratchsim/experiment/pipeline.hpp"

using namespace scratchsim;
using namespace scratchsim::experiment;
using nlohmann::json;

namespace {

json small_theorem1() {
    return json::parse(R"({
        "mode": "theorem1",
        "grid": {"shape": [64, 64], "lo": [-8, -8], "hi": [8, 8]},
        "potential": {"type": "harmonic", "stiffness": 0.25, "offset": 1.0},
        "initial_state": {"center": [-1.0, 0.3], "sigma": 0.7, "momentum": [1.2, 0.0]},
        "position_partition": {"type": "half_spaces", "axis": 0, "at": 0.0},
        "schedule": [0.0, 2.0],
        "Q": 17,
        "lambdas": [100, 1000],
        "insensitivity_lambdas": [100, 10000, 1000000],
        "seed": 3
    })");
}

json small_theorem2() {
    return json::parse(R"({
        "mode": "theorem2",
        "grid": {"shape": [16, 16, 16], "lo": [-8, -8, -8], "hi": [8, 8, 8]},
        "potential": {"type": "harmonic", "stiffness": 0.25, "offset": 1.0},
        "initial_state": {"center": [-1.0, 0.3, 0.0], "sigma": 0.8, "momentum": [1.2, 0.0, 0.4]},
        "position_partition": {"type": "half_spaces", "axis": 0, "at": 0.0},
        "momentum_partition": {"type": "half_spaces", "axis": 0, "at": 0.0},
        "schedule": [0.0, 1.5],
        "Q": 257,
        "lambdas": [100, 1000]
    })");
}

}  // namespace

TEST_CASE("bound arithmetic") {
    CHECK(static_cast<double>(discrimination_bound(1, 17, 2, 2)) == doctest::Approx(1.0 / std::pow(17.0, 0.25)));
    CHECK(static_cast<double>(discrimination_bound(5, 257, 4, 2)) == doctest::Approx(0.2 / std::pow(257.0, 0.125)));
    CHECK_THROWS_AS(discrimination_bound(0, 17, 2, 2), DomainError);
    CHECK(theorem_Q_floor(2, 2) == 17);
    CHECK(theorem_Q_floor(2, 4) == 257);
    CHECK(theorem_Q_floor(3, 2) == 730);
    CHECK_THROWS_AS(theorem_Q_floor(64, 64), DomainError);
}

TEST_CASE("renormalization logs the gap") {
    std::vector<double> gaps;
    const auto out = renormalize({{0.3, 0.6999999999}, {0.5, 0.5}}, gaps);
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[0] == doctest::Approx(-1e-10).epsilon(1e-3));
    CHECK(gaps[1] == 0.0);
    CHECK(out[0][0] + out[0][1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(renormalize({{0.0, 0.0}}, gaps), DomainError);
}

TEST_CASE("config validation") {
    SUBCASE("defaults validate") {
        CHECK_NOTHROW(ExperimentConfig::from_json(small_theorem1()).validate());
        CHECK_NOTHROW(ExperimentConfig::from_json(small_theorem2()).validate());
    }
    SUBCASE("Q must exceed n^(2n)") {
        auto j = small_theorem1();
        j["Q"] = 16;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
        CHECK_THROWS_AS(run_theorem1(ExperimentConfig::from_json(j)), StageError);
    }
    SUBCASE("theorem 1 needs two checkpoints and no momentum partition") {
        auto j = small_theorem1();
        j["schedule"] = {0.0, 1.0, 2.0};
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
        j = small_theorem1();
        j["momentum_partition"] = {{"type", "half_spaces"}};
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
    }
    SUBCASE("theorem 2 needs D = 3 and K >= 2") {
        auto j = small_theorem2();
        j["schedule"] = {0.0};
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
        j = small_theorem2();
        j["grid"] = {{"shape", {16, 16}}, {"lo", {-8, -8}}, {"hi", {8, 8}}};
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
    }
    SUBCASE("position-only mode relaxes the budget to n^(Kn)") {
        auto j = small_theorem2();
        j["Q"] = 17;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
        j.erase("momentum_partition");
        CHECK_NOTHROW(ExperimentConfig::from_json(j).validate());
        j["Q"] = 16;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
    }
    SUBCASE("malformed entries") {
        auto j = small_theorem1();
        j["potential"] = {{"type", "quartic"}};
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).make_potential(), DomainError);
        j = small_theorem1();
        j["lambdas"] = {1000, 100};
        CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), DomainError);
        j = small_theorem1();
        j.erase("grid");
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), DomainError);
        const auto path = std::filesystem::temp_directory_path() / "scratchsim_bad_config.json";
        std::ofstream(path) << "{ not json";
        CHECK_THROWS_AS(ExperimentConfig::load(path), FormatError);
    }
    SUBCASE("potential and partition kinds") {
        const auto g = grid::SpatialGrid::cube(3, 8, -2, 2);
        CHECK(make_potential(json{{"type", "gaussian_well"}, {"depth", 2.0}, {"width", 0.5}}, 3)->value(Vec(0, 0, 0), 0) ==
              doctest::Approx(1.0));
        CHECK(make_potential(json{{"type", "double_well"}, {"a", 1.0}, {"b", 1.0}}, 3)->value(Vec(1, 0, 0), 0) > 0.0);
        const auto boxes = make_partition(json::parse(R"({"type": "boxes", "regions": [
            [{"lo": [null, null, null], "hi": [0, null, null]}],
            [{"lo": [0, null, null], "hi": null}]]})"),
                                          3, grid::Space::position);
        CHECK(boxes.count() == 2);
        CHECK_NOTHROW(boxes.validate(g));
        CHECK(make_partition(json{{"type", "orthants"}}, 3, grid::Space::position).count() == 8);
    }
}

TEST_CASE("theorem 1 on a coarse grid") {
    const auto cfg = ExperimentConfig::from_json(small_theorem1());
    const auto rep = run_theorem1(cfg);
    CHECK(rep.passed());
    CHECK(rep.N >= 1);
    CHECK(rep.N <= rep.Q);
    for (const auto& run : rep.runs) {
        CHECK(run.position_ok);
        CHECK(run.sums_ok);
    }
    CHECK(rep.files.count("probabilities.csv") == 1);
    CHECK(rep.files.count("insensitivity.csv") == 1);
    CHECK(rep.files.count("trajectory.csv") == 1);
    CHECK(rep.data["bound"]["N"].get<std::uint64_t>() == rep.N);


    // Byte-identical rerun.
    const auto again = run_theorem1(cfg);
    CHECK(again.json_text() == rep.json_text());
    CHECK(again.files == rep.files);

    const auto dir = std::filesystem::temp_directory_path() / "scratchsim_report_test";
    std::filesystem::remove_all(dir);
    write_report(rep, dir);
    std::ifstream in(dir / "report.json");
    const auto j = json::parse(in);
    CHECK(j["passed"].get<bool>());
    CHECK(std::filesystem::exists(dir / "occupancy_lambda_1.csv"));
}

TEST_CASE("stationary state needs no transfer") {
    auto j = small_theorem1();
    // Harmonic ground state (sigma = 1 for k = 1/4, m = hbar = 1), off-centre
    // partition. The continuum ground state is stationary on the grid only to
    // discretisation accuracy.
    j["initial_state"] = {{"center", {0.0, 0.0}}, {"sigma", 1.0}, {"momentum", {0.0, 0.0}}};
    j["position_partition"] = {{"type", "half_spaces"}, {"axis", 0}, {"at", 0.6}};
    j["Q"] = 100000;
    const auto rep = run_theorem1(ExperimentConfig::from_json(j));
    CHECK(rep.passed());
    for (std::size_t k = 0; k < 2; ++k) CHECK(rep.P[0][k] == doctest::Approx(rep.P[1][k]).epsilon(1e-6));
    const auto& regions = rep.data["geometry"]["waypoints"]["regions"];
    for (const auto& itinerary : regions) CHECK(itinerary[0] == itinerary[1]);
    const auto& counts = rep.final_run().occupancy.counts;
    CHECK(counts[0] == counts[1]);
}

TEST_CASE("instrument records") {
    DiscriminationReport rep;
    rep.N = 4;
    rep.Q = 17;
    rep.bound = discrimination_bound(4, 17, 2, 2);
    rep.P = {{0.26, 0.74}, {0.49, 0.51}};
    ClassicalRun run;
    run.occupancy.pi = {{0.25, 0.75}, {0.5, 0.5}};
    rep.runs.push_back(run);
    SUBCASE("coarse instrument cannot tell them apart") {
        const auto r = measurement_records(rep, 10.0 * static_cast<double>(rep.bound));
        CHECK(r["indistinguishable"].get<bool>());
        CHECK(r["records_identical"].get<bool>());
        CHECK(r["resolution_at_least_bound"].get<bool>());
    }
    SUBCASE("instrument finer than the gap distinguishes") {
        const auto r = measurement_records(rep, 1e-3);
        CHECK_FALSE(r["indistinguishable"].get<bool>());
        CHECK(r["distinguishable"].get<bool>());
        CHECK_FALSE(r["resolution_at_least_bound"].get<bool>());
    }
    CHECK_THROWS_AS(measurement_records(rep, 0.0), DomainError);
}

TEST_CASE("theorem 2 and the black box on a coarse grid") {
    const auto cfg = ExperimentConfig::from_json(small_theorem2());
    const auto rep = run_blackbox(cfg);
    CHECK(rep.passed());
    CHECK(rep.groups == 4);
    CHECK(rep.final_run().momentum_ok);
    CHECK(rep.data["blackbox"]["indistinguishable"].get<bool>());
}

TEST_CASE("theorem 2 position only") {
    auto j = small_theorem2();
    j.erase("momentum_partition");
    j["Q"] = 17;
    const auto pos = run_theorem2(ExperimentConfig::from_json(j));
    CHECK(pos.groups == 2);
    CHECK(pos.P_tilde.empty());
    CHECK(pos.passed());
}
