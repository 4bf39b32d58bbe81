#pragma once

#include <vector>

#include "json.hpp"
#include "scratchsim/geometry/curve.hpp"
#include "scratchsim/geometry/paths.hpp"
#include "scratchsim/grid/partition.hpp"

namespace scratchsim::geometry {

struct ConditioningOptions {
    double mass = 1.0;
    /// Checkpoint times t_1 < ... < t_K.
    std::vector<double> times;
    /// Half-width P of the momentum box [-P, P]^D used to clip unbounded regions.
    double momentum_extent = 0.0;
    /// Fraction of P kept between a target momentum and region faces.
    double margin = 0.05;
    /// Upper limit on c_{l,j} relative to the adjacent timing secants.
    double timing_factor = 2.5;
    double blend_step = 0.05;
    /// Simplicity and separation are re-verified with these settings.
    PathOptions paths;
};

struct MomentumConditioning {
    /// region[l][j]: 1-based momentum region label.
    std::vector<std::vector<int>> region;
    /// Unit tangent direction at checkpoint j.
    std::vector<std::vector<Vec>> direction;
    /// c_{l,j} > 0 with p = m c dq/ds.
    std::vector<std::vector<double>> speed;
    int adjusted = 0;
};

/// Ray interval {rho > 0 : rho d inside the region shrunk by the margin},
/// clipped to [-P, P]^D. Empty when lo >= hi.
struct RayInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return !(hi > lo); }
};
RayInterval ray_interval(const grid::Region& region, const Vec& d, int dim, double extent, double margin);

/// Rotates knot tangents so that exactly counts[j][k] particles have their
/// tangent direction in momentum region k + 1 at checkpoint j, and picks the
/// speed multipliers. Throws ConditioningError listing offending (l, j).
MomentumConditioning condition_momenta(std::vector<ScratchCurve>& curves, const grid::RegionPartition& momentum,
                                       const std::vector<std::vector<int>>& counts, const ConditioningOptions& options);

/// Momentum m c_{l,j} dq/ds at checkpoint j.
Vec checkpoint_momentum(const ScratchCurve& c, const MomentumConditioning& mc, std::size_t l, std::size_t j,
                        double mass);

nlohmann::json to_json(const MomentumConditioning& mc, int dim);

}  // namespace scratchsim::geometry
