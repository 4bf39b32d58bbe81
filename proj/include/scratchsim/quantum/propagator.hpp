#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "scratchsim/grid/field.hpp"
#include "scratchsim/grid/fourier.hpp"
#include "scratchsim/grid/partition.hpp"
#include "scratchsim/quantum/potential.hpp"

namespace scratchsim::quantum {

struct QuantumSystem {
    grid::SpatialGrid grid;
    double mass = 1.0;
    double hbar = 1.0;
    std::shared_ptr<const Potential> potential;
};

/// Checkpoint times t_1 < ... < t_K, K >= 2.
struct CheckpointSchedule {
    std::vector<double> times;

    void validate() const;
    std::size_t size() const noexcept { return times.size(); }
    double initial() const { return times.front(); }
    double final() const { return times.back(); }
};

struct Wavefunction {
    grid::ComplexField psi;
    double t = 0.0;

    double norm2() const;
};

/// Normalised Gaussian packet whose density has standard deviation `sigma`
/// per axis, centred at `center` with mean momentum `momentum`.
Wavefunction gaussian_packet(const grid::SpatialGrid& grid, const Vec& center, double sigma, const Vec& momentum,
                             double hbar = 1.0, double t = 0.0);

struct PropagationOptions {
    double max_step = 1e-2;
    double norm_tolerance = 1e-8;
    /// Probability mass allowed in the outermost layer of grid cells.
    double edge_eps = 1e-6;
};

struct PropagationResult {
    std::vector<Wavefunction> snapshots;  ///< one per checkpoint, at exact times
    std::size_t steps = 0;
    double max_norm_drift = 0.0;
    double max_edge_mass = 0.0;
    bool confinement_warning = false;
};

/// Fills `out` with the potential sampled on the grid at time t.
using PotentialSampler = std::function<void(double t, std::span<double> out)>;

/// Strang-split spectral propagator: half potential kick, exact kinetic
/// drift in Fourier space, half potential kick. Time-dependent potentials
/// are sampled at the midpoint of each step.
class Propagator {
public:
    Propagator(grid::SpatialGrid grid, double mass, double hbar, PotentialSampler sampler, bool static_potential,
               PropagationOptions options = {});
    Propagator(const QuantumSystem& system, PropagationOptions options = {});

    /// Snapshots at every checkpoint; psi0.t must equal schedule.initial().
    PropagationResult propagate(const Wavefunction& psi0, const CheckpointSchedule& schedule);

    /// Evolves in place from psi.t to `t_target` (either direction) in
    /// equal steps no longer than max_step. Returns the number of steps.
    std::size_t evolve(Wavefunction& psi, double t_target);

    const grid::SpatialGrid& grid() const noexcept { return grid_; }
    double edge_mass(const grid::ComplexField& psi) const;

private:
    const std::vector<std::complex<double>>& kinetic_factor(double dt);
    void potential_factor(double t_mid, double dt, std::vector<std::complex<double>>& out);

    grid::SpatialGrid grid_;
    double mass_, hbar_;
    PotentialSampler sampler_;
    bool static_;
    PropagationOptions options_;
    grid::FftPlan plan_;
    std::vector<double> k2_;  // |k|^2 in FFT order
    std::vector<double> potential_cache_;
    std::map<double, std::vector<std::complex<double>>> kinetic_cache_;
    std::map<double, std::vector<std::complex<double>>> half_kick_cache_;
    std::vector<std::size_t> edge_indices_;
};

PropagationResult propagate(const QuantumSystem& system, const Wavefunction& psi0,
                            const CheckpointSchedule& schedule, const PropagationOptions& options = {});

/// P_k = integral of |psi|^2 (position) or |phi|^2 (momentum) over region k.
std::vector<double> occupation_probabilities(const Wavefunction& psi, const grid::RegionPartition& partition,
                                             double hbar = 1.0);

}  // namespace scratchsim::quantum
