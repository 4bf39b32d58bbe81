#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "scratchsim/geometry/itinerary.hpp"
#include "scratchsim/grid/grid.hpp"
#include "scratchsim/grid/partition.hpp"
#include "scratchsim/vec.hpp"

namespace scratchsim::geometry {

struct WaypointOptions {
    /// Minimum distance from a waypoint to its region boundary and the box edge.
    double clearance = 0.0;
    /// Minimum distance between any two waypoints.
    double min_separation = 0.0;
    /// Minimum triangle height over all point triples (general-position mode).
    double eps_coll = 0.0;
    bool general_position = false;
    int max_attempts = 20000;
};

struct WaypointPlan {
    int dim = 0;
    /// points[l][j]: waypoint of particle l at checkpoint j.
    std::vector<std::vector<Vec>> points;
    Assignment assignment;
    WaypointOptions options;
};

/// Smallest height of the triangle (a, b, c); zero for collinear points.
double triangle_height(const Vec& a, const Vec& b, const Vec& c);

/// Rejection sampling of waypoints inside the assigned regions. Deterministic
/// in the seed. Throws CapacityError when a region cannot host its points.
WaypointPlan sample_waypoints(const grid::SpatialGrid& grid, const grid::RegionPartition& partition,
                              const Assignment& assignment, std::uint64_t seed, const WaypointOptions& options);

nlohmann::json to_json(const WaypointPlan& plan);

}  // namespace scratchsim::geometry
