#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "scratchsim/vec.hpp"

namespace scratchsim::grid {

enum class Space { position, momentum };

/// Axis-aligned periodic sampling of a box in R^D, D in {2, 3}, row-major
/// with the last axis fastest.
///
/// Position grids are cell-centred: sample i on an axis sits at
/// lo + (i + 1/2) h. Momentum grids are the Fourier dual of a position grid:
/// spacing 2*pi*hbar/L, nodes at (i - n/2) dp, stored in centred order so
/// zero momentum sits at index n/2.
class SpatialGrid {
public:
    SpatialGrid(std::vector<std::size_t> shape, std::vector<double> lo, std::vector<double> hi);

    /// Square/cubic box [lo, hi]^D with n points per axis.
    static SpatialGrid cube(int dim, std::size_t n, double lo, double hi);

    int dim() const noexcept { return dim_; }
    Space space() const noexcept { return space_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t extent(int axis) const { return shape_[axis]; }
    const std::array<std::size_t, 3>& shape() const noexcept { return shape_; }
    double lo(int axis) const { return lo_[axis]; }
    double hi(int axis) const { return hi_[axis]; }
    double length(int axis) const { return hi_[axis] - lo_[axis]; }
    double spacing(int axis) const { return (hi_[axis] - lo_[axis]) / double(shape_[axis]); }
    double min_spacing() const;
    double cell_volume() const;
    double diagonal() const;
    Vec lower() const;
    Vec upper() const;

    double coordinate(int axis, std::size_t i) const;
    std::array<std::size_t, 3> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::array<std::size_t, 3>& idx) const;
    Vec point(std::size_t flat) const;

    /// True for points inside the closed box.
    bool contains(const Vec& q) const;

    /// The Fourier-dual momentum grid. Only valid on position grids.
    SpatialGrid momentum_grid(double hbar) const;
    /// Inverse of momentum_grid(). Only valid on momentum grids.
    SpatialGrid position_grid() const;
    double hbar() const noexcept { return hbar_; }

    friend bool operator==(const SpatialGrid& a, const SpatialGrid& b);

private:
    SpatialGrid() = default;

    int dim_ = 0;
    Space space_ = Space::position;
    std::size_t size_ = 0;
    std::array<std::size_t, 3> shape_{1, 1, 1};
    std::array<double, 3> lo_{0, 0, 0};
    std::array<double, 3> hi_{0, 0, 0};
    // For momentum grids: the position box this grid is dual to.
    std::array<double, 3> dual_lo_{0, 0, 0};
    std::array<double, 3> dual_hi_{0, 0, 0};
    double hbar_ = 0.0;
};

}  // namespace scratchsim::grid
