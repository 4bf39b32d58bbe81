#pragma once

#include <complex>
#include <span>
#include <vector>

#include "scratchsim/error.hpp"
#include "scratchsim/grid/grid.hpp"

namespace scratchsim::grid {

/// Samples of a real or complex function on a grid, row-major.
template <class T>
class Field {
public:
    using value_type = T;

    explicit Field(SpatialGrid grid) : grid_(std::move(grid)), data_(grid_.size(), T{}) {}
    Field(SpatialGrid grid, std::vector<T> data) : grid_(std::move(grid)), data_(std::move(data)) {
        if (data_.size() != grid_.size()) throw DomainError("field sample count does not match grid");
    }

    const SpatialGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    template <class F>
    static Field sample(const SpatialGrid& g, F&& fn) {
        Field f(g);
        for (std::size_t i = 0; i < g.size(); ++i) f.data_[i] = fn(g.point(i));
        return f;
    }

private:
    SpatialGrid grid_;
    std::vector<T> data_;
};

using ScalarField = Field<double>;
using ComplexField = Field<std::complex<double>>;

/// Midpoint-rule integral over the whole grid.
double integrate(const ScalarField& field);

/// |psi|^2 pointwise.
ScalarField density(const ComplexField& psi);

}  // namespace scratchsim::grid
