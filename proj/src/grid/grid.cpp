#include "scratchsim/grid/grid.hpp"

#include <cmath>
#include <numbers>

#include "scratchsim/error.hpp"

namespace scratchsim::grid {

SpatialGrid::SpatialGrid(std::vector<std::size_t> shape, std::vector<double> lo, std::vector<double> hi) {
    const auto d = shape.size();
    if (d != 2 && d != 3) throw DomainError("grid dimension must be 2 or 3");
    if (lo.size() != d || hi.size() != d) throw DomainError("grid bounds do not match dimension");
    dim_ = static_cast<int>(d);
    size_ = 1;
    for (std::size_t a = 0; a < d; ++a) {
        if (shape[a] < 8) throw DomainError("every grid axis needs at least 8 points");
        if (!(hi[a] > lo[a]) || !std::isfinite(lo[a]) || !std::isfinite(hi[a]))
            throw DomainError("grid axis requires finite hi > lo");
        shape_[a] = shape[a];
        lo_[a] = lo[a];
        hi_[a] = hi[a];
        size_ *= shape[a];
    }
}

SpatialGrid SpatialGrid::cube(int dim, std::size_t n, double lo, double hi) {
    const auto d = static_cast<std::size_t>(dim);
    return SpatialGrid(std::vector<std::size_t>(d, n), std::vector<double>(d, lo), std::vector<double>(d, hi));
}

double SpatialGrid::min_spacing() const {
    double h = spacing(0);
    for (int a = 1; a < dim_; ++a) h = std::min(h, spacing(a));
    return h;
}

double SpatialGrid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
}

double SpatialGrid::diagonal() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += length(a) * length(a);
    return std::sqrt(s);
}

Vec SpatialGrid::lower() const {
    Vec v;
    for (int a = 0; a < dim_; ++a) v[a] = lo_[a];
    return v;
}

Vec SpatialGrid::upper() const {
    Vec v;
    for (int a = 0; a < dim_; ++a) v[a] = hi_[a];
    return v;
}

double SpatialGrid::coordinate(int axis, std::size_t i) const {
    const double off = space_ == Space::position ? 0.5 : 0.0;
    return lo_[axis] + (double(i) + off) * spacing(axis);
}

std::array<std::size_t, 3> SpatialGrid::unflatten(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        idx[a] = flat % shape_[a];
        flat /= shape_[a];
    }
    return idx;
}

std::size_t SpatialGrid::flatten(const std::array<std::size_t, 3>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat = flat * shape_[a] + idx[a];
    return flat;
}

Vec SpatialGrid::point(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Vec q;
    for (int a = 0; a < dim_; ++a) q[a] = coordinate(a, idx[a]);
    return q;
}

bool SpatialGrid::contains(const Vec& q) const {
    for (int a = 0; a < dim_; ++a)
        if (q[a] < lo_[a] || q[a] > hi_[a]) return false;
    return true;
}

SpatialGrid SpatialGrid::momentum_grid(double hbar) const {
    if (space_ != Space::position) throw DomainError("momentum_grid() needs a position grid");
    if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
    SpatialGrid g = *this;
    g.space_ = Space::momentum;
    g.hbar_ = hbar;
    for (int a = 0; a < dim_; ++a) {
        const double dp = 2.0 * std::numbers::pi * hbar / length(a);
        const auto n = shape_[a];
        g.dual_lo_[a] = lo_[a];
        g.dual_hi_[a] = hi_[a];
        g.lo_[a] = -double(n / 2) * dp;
        g.hi_[a] = g.lo_[a] + double(n) * dp;
    }
    return g;
}

SpatialGrid SpatialGrid::position_grid() const {
    if (space_ != Space::momentum) throw DomainError("position_grid() needs a momentum grid");
    SpatialGrid g = *this;
    g.space_ = Space::position;
    g.hbar_ = 0.0;
    for (int a = 0; a < dim_; ++a) {
        g.lo_[a] = dual_lo_[a];
        g.hi_[a] = dual_hi_[a];
        g.dual_lo_[a] = g.dual_hi_[a] = 0.0;
    }
    return g;
}

bool operator==(const SpatialGrid& a, const SpatialGrid& b) {
    return a.dim_ == b.dim_ && a.space_ == b.space_ && a.shape_ == b.shape_ && a.lo_ == b.lo_ &&
           a.hi_ == b.hi_ && a.dual_lo_ == b.dual_lo_ && a.dual_hi_ == b.dual_hi_ && a.hbar_ == b.hbar_;
}

}  // namespace scratchsim::grid
