#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "scratchsim/grid/field.hpp"
#include "scratchsim/grid/grid.hpp"
#include "scratchsim/vec.hpp"

namespace scratchsim::grid {

/// Closed axis-aligned box. Infinite bounds are allowed, which is how
/// momentum-space regions cover all of R^D.
struct Box {
    Vec lo{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
    Vec hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};

    bool contains(const Vec& q, int dim) const;
    /// Distance from an interior point to the nearest face; negative outside.
    double depth(const Vec& q, int dim) const;
};

/// A union of boxes.
struct Region {
    std::vector<Box> boxes;
    bool contains(const Vec& q, int dim) const;
};

/// n >= 2 regions labelled 1..n covering position or momentum space. A point
/// on a shared boundary belongs to the lowest label containing it.
class RegionPartition {
public:
    RegionPartition(int dim, Space space, std::vector<Region> regions);

    /// Two regions split by the plane q[axis] = at: label 1 below, 2 above.
    static RegionPartition half_spaces(int dim, Space space, int axis, double at = 0.0);
    /// 2^dim orthants around `center`, labelled in binary order of the
    /// per-axis "above" bits (axis 0 most significant).
    static RegionPartition orthants(int dim, Space space, const Vec& center);

    int dim() const noexcept { return dim_; }
    Space space() const noexcept { return space_; }
    int count() const noexcept { return static_cast<int>(regions_.size()); }
    const Region& region(int label) const;
    const std::vector<Region>& regions() const noexcept { return regions_; }

    /// Label in 1..n, or 0 when no region contains q.
    int label_of(const Vec& q) const;

    /// Zero-based label of every grid point (-1 for uncovered points).
    std::vector<std::int32_t> label_grid(const SpatialGrid& grid) const;

    /// Checks that every grid point is covered and every region owns at
    /// least one grid point strictly inside it. Throws DomainError.
    void validate(const SpatialGrid& grid) const;

private:
    int dim_;
    Space space_;
    std::vector<Region> regions_;
};

/// Midpoint-rule integral of `field` over the grid points assigned to region
/// `label` (1-based). Summed over all labels this equals integrate(field).
double integrate_region(const ScalarField& field, const RegionPartition& partition, int label);

/// All region integrals at once, index k-1 for label k.
std::vector<double> integrate_regions(const ScalarField& field, const RegionPartition& partition);

}  // namespace scratchsim::grid
