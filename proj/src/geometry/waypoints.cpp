#include "scratchsim/geometry/waypoints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scratchsim/error.hpp"
#include "scratchsim/random.hpp"

namespace scratchsim::geometry {

using grid::Box;
using grid::RegionPartition;
using grid::SpatialGrid;

double triangle_height(const Vec& a, const Vec& b, const Vec& c) {
    const double ab = norm(b - a), bc = norm(c - b), ca = norm(a - c);
    const double longest = std::max({ab, bc, ca});
    if (longest == 0.0) return 0.0;
    const double area2 = norm(cross(b - a, c - a));
    return area2 / longest;
}

namespace {

/// Region boxes clipped to the grid shrunk by the clearance.
std::vector<Box> usable_boxes(const SpatialGrid& g, const grid::Region& region, double clearance) {
    std::vector<Box> out;
    for (const auto& b : region.boxes) {
        Box c;
        bool ok = true;
        for (int a = 0; a < g.dim(); ++a) {
            c.lo[a] = std::max(b.lo[a] + clearance, g.lo(a) + clearance);
            c.hi[a] = std::min(b.hi[a] - clearance, g.hi(a) - clearance);
            if (!(c.hi[a] > c.lo[a])) ok = false;
        }
        if (ok) out.push_back(c);
    }
    return out;
}

double box_volume(const Box& b, int dim) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= b.hi[a] - b.lo[a];
    return v;
}

double region_depth(const grid::Region& r, const Vec& q, int dim) {
    double d = -std::numeric_limits<double>::infinity();
    for (const auto& b : r.boxes) d = std::max(d, b.depth(q, dim));
    return d;
}

bool has_interior_grid_point(const SpatialGrid& g, const std::vector<Box>& boxes) {
    for (const auto& b : boxes) {
        bool all_axes = true;
        for (int a = 0; a < g.dim() && all_axes; ++a) {
            // First cell centre >= lo.
            const double h = g.spacing(a);
            const double i = std::ceil((b.lo[a] - g.lo(a)) / h - 0.5);
            all_axes = g.lo(a) + (i + 0.5) * h <= b.hi[a];
        }
        if (all_axes) return true;
    }
    return false;
}

}  // namespace

WaypointPlan sample_waypoints(const SpatialGrid& g, const RegionPartition& partition, const Assignment& assignment,
                              std::uint64_t seed, const WaypointOptions& opt) {
    if (g.space() != grid::Space::position || partition.space() != grid::Space::position)
        throw DomainError("waypoints live in position space");
    if (partition.dim() != g.dim()) throw DomainError("partition and grid dimensions differ");
    if (static_cast<int>(assignment.region.size()) != assignment.particles)
        throw DomainError("assignment is inconsistent");
    const int dim = g.dim();

    std::vector<std::vector<Box>> usable(partition.count());
    for (int k = 1; k <= partition.count(); ++k) {
        usable[k - 1] = usable_boxes(g, partition.region(k), opt.clearance);
        bool needed = false;
        for (const auto& row : assignment.region)
            needed = needed || std::find(row.begin(), row.end(), k) != row.end();
        if (needed && !has_interior_grid_point(g, usable[k - 1]))
            throw CapacityError("region " + std::to_string(k) +
                                " has no grid point at the required clearance; reduce N or the clearance");
    }

    Rng rng(seed);
    WaypointPlan plan;
    plan.dim = dim;
    plan.assignment = assignment;
    plan.options = opt;
    plan.points.assign(assignment.particles, std::vector<Vec>(assignment.checkpoints));
    std::vector<Vec> placed;

    for (int j = 0; j < assignment.checkpoints; ++j)
        for (int l = 0; l < assignment.particles; ++l) {
            const int k = assignment.region[l][j];
            const auto& boxes = usable[k - 1];
            double total = 0.0;
            for (const auto& b : boxes) total += box_volume(b, dim);
            bool done = false;
            for (int attempt = 0; attempt < opt.max_attempts && !done; ++attempt) {
                double pick = uniform01(rng) * total;
                std::size_t bi = 0;
                while (bi + 1 < boxes.size() && pick > box_volume(boxes[bi], dim)) pick -= box_volume(boxes[bi++], dim);
                Vec q;
                for (int a = 0; a < dim; ++a) q[a] = uniform(rng, boxes[bi].lo[a], boxes[bi].hi[a]);
                if (partition.label_of(q) != k) continue;
                if (region_depth(partition.region(k), q, dim) < opt.clearance) continue;
                bool ok = true;
                for (const auto& p : placed)
                    if (norm(p - q) < opt.min_separation || p == q) {
                        ok = false;
                        break;
                    }
                if (ok && opt.general_position)
                    for (std::size_t a = 0; a < placed.size() && ok; ++a)
                        for (std::size_t b = a + 1; b < placed.size() && ok; ++b)
                            ok = triangle_height(placed[a], placed[b], q) >= opt.eps_coll;
                if (!ok) continue;
                plan.points[l][j] = q;
                placed.push_back(q);
                done = true;
            }
            if (!done)
                throw CapacityError("could not place waypoint for particle " + std::to_string(l) + " at checkpoint " +
                                    std::to_string(j) + " in region " + std::to_string(k) +
                                    "; reduce N or the separation");
        }
    return plan;
}

nlohmann::json to_json(const WaypointPlan& plan) {
    auto pts = nlohmann::json::array();
    for (const auto& row : plan.points) {
        auto r = nlohmann::json::array();
        for (const auto& q : row) {
            auto p = nlohmann::json::array();
            for (int a = 0; a < plan.dim; ++a) p.push_back(q[a]);
            r.push_back(p);
        }
        pts.push_back(r);
    }
    return {{"dim", plan.dim},
            {"points", pts},
            {"regions", plan.assignment.region},
            {"clearance", plan.options.clearance},
            {"min_separation", plan.options.min_separation},
            {"eps_coll", plan.options.eps_coll},
            {"general_position", plan.options.general_position}};
}

}  // namespace scratchsim::geometry
