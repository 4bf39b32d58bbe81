#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "scratchsim/grid/grid.hpp"
#include "scratchsim/grid/partition.hpp"
#include "scratchsim/quantum/potential.hpp"
#include "scratchsim/quantum/propagator.hpp"

namespace scratchsim::experiment {

enum class Mode { theorem1, theorem2 };

struct Tolerances {
    /// Negative values mean "derive from the grid": 1e-6 x diagonal and 4 h.
    double eps_coll = -1.0;
    double delta_path = -1.0;
    double eps_q = 1e-3;
    double edge_eps = 1e-6;
    double norm = 1e-8;
    double energy = 1e-6;
};

struct ExperimentConfig {
    Mode mode = Mode::theorem1;
    std::vector<std::size_t> shape;
    std::vector<double> lo, hi;
    double mass = 1.0;
    double hbar = 1.0;
    nlohmann::json potential;
    nlohmann::json initial_state;
    nlohmann::json position_partition;
    /// Null in Theorem-1 mode and in the position-only Theorem-2 mode.
    nlohmann::json momentum_partition;
    std::vector<double> schedule;
    std::uint64_t Q = 0;
    /// Classical sweep; the bound is asserted at the largest entry.
    std::vector<double> lambdas{1e2, 1e3, 1e4};
    /// Lambdas for the Psi insensitivity table; defaults to `lambdas`.
    std::vector<double> insensitivity_lambdas;
    std::uint64_t seed = 1;
    /// Re-sampling budget for waypoint and path construction.
    int retries = 8;
    Tolerances tolerances;
    double propagation_step = 5e-3;
    /// Classical step = stiffness step / dt_divisor, halved on a stability
    /// error up to max_halvings times.
    double dt_divisor = 1.0;
    int max_halvings = 4;
    /// Half-width of the momentum box clipping unbounded momentum regions;
    /// <= 0 derives it from the quantum momentum spread.
    double momentum_extent = 0.0;
    /// Black-box instrument resolution as a multiple of the bound, unless an
    /// absolute resolution > 0 is given.
    double resolution_factor = 10.0;
    double resolution = 0.0;
    /// Directory tabulated potentials are resolved against.
    std::filesystem::path base_dir;
    /// The JSON the config was read from, echoed into the report.
    nlohmann::json source;

    grid::SpatialGrid grid() const;
    grid::RegionPartition positions() const;
    bool has_momentum() const { return !momentum_partition.is_null(); }
    grid::RegionPartition momenta() const;
    std::shared_ptr<const quantum::Potential> make_potential() const;
    quantum::QuantumSystem system() const;
    quantum::Wavefunction initial_wavefunction() const;
    quantum::CheckpointSchedule checkpoints() const;
    double eps_coll() const;
    double delta_path() const;

    /// Number of regions n.
    int regions() const;
    /// Theorem hypotheses: K = 2 and Q > n^{2n} (Theorem 1), D = 3 and
    /// Q > n^{2Kn} or n^{Kn} without momenta (Theorem 2). U > 0 is checked by
    /// the pipeline on the grid. Throws DomainError.
    void validate() const;

    static ExperimentConfig from_json(const nlohmann::json& j, std::filesystem::path base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);
};

/// Potential from its JSON spec: harmonic, driven_harmonic, gaussian_well,
/// double_well or tabulated.
std::shared_ptr<const quantum::Potential> make_potential(const nlohmann::json& spec, int dim,
                                                         const std::filesystem::path& base_dir = {});

/// half_spaces, orthants or boxes.
grid::RegionPartition make_partition(const nlohmann::json& spec, int dim, grid::Space space);

/// The smallest legal Q for n regions and the given number of groups:
/// n^{groups n} + 1. Throws DomainError on overflow.
std::uint64_t theorem_Q_floor(int n, int groups);

}  // namespace scratchsim::experiment
