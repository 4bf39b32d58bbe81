#pragma once

#include <string>
#include <vector>

#include "scratchsim/quantum/propagator.hpp"
#include "scratchsim/scratch/scratched.hpp"

namespace scratchsim::quantum {

struct InsensitivityRow {
    double lambda = 0.0;
    double l1_potential = 0.0;
    double linf_fourier = 0.0;
    double l2_wavefunction = 0.0;
};

struct InsensitivityTable {
    std::vector<InsensitivityRow> rows;
    /// Tube width lambda^{-1/2} equals half the smallest grid spacing here;
    /// grid quantities are not expected to follow the continuum beyond it.
    double grid_floor_lambda = 0.0;

    /// Header `lambda,l1_potential,linf_fourier,l2_wavefunction`.
    std::string to_csv() const;
};

struct InsensitivityOptions {
    PropagationOptions propagation;
    /// Gauss points per axis on each refined cell.
    int quadrature_order = 3;
    /// Leaf cells are at most this many tube widths lambda^{-1/2} across.
    double leaf_width = 0.5;
    /// Extra bisection levels for leaves cut by the normal plane at a curve end.
    int end_depth = 2;
};

/// ||U^lambda - U||_L1 over the grid box at time t, by adaptive cubature
/// refined down to the tube width. Independent of the grid resolution.
double scratch_l1_difference(const scratch::ScratchedPotential& scratched, const grid::SpatialGrid& box, double t = 0.0,
                             const InsensitivityOptions& options = {});

/// max_p |FT(U^lambda - U)(p)| with the (2 pi hbar)^{-D/2} convention,
/// approximated by the DFT of the grid samples.
double scratch_linf_fourier(const scratch::ScratchedPotential& scratched, const grid::SpatialGrid& grid,
                            double hbar = 1.0, double t = 0.0);

/// Decay table over increasing lambda for the scratches of `scratched`
/// (its own lambda is ignored). The L2 column compares Psi(t_f) under
/// U^lambda with Psi(t_f) under the base potential.
InsensitivityTable scratch_insensitivity(const QuantumSystem& system, const scratch::ScratchedPotential& scratched,
                                         const Wavefunction& psi0, const CheckpointSchedule& schedule,
                                         const std::vector<double>& lambdas, const InsensitivityOptions& options = {});

/// True when every entry is at most (1 + slack) times the previous one,
/// considering only rows with lambda <= until.
bool decays(const std::vector<double>& lambdas, const std::vector<double>& values, double slack, double until);

/// Least-squares slope of log(value) against log(lambda).
double log_log_slope(const std::vector<double>& lambdas, const std::vector<double>& values);

}  // namespace scratchsim::quantum
