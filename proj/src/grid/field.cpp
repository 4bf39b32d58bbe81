#include "scratchsim/grid/field.hpp"

#include <numeric>

#include "scratchsim/simd/kernels.hpp"

namespace scratchsim::grid {

double integrate(const ScalarField& field) {
    const auto v = field.values();
    return std::accumulate(v.begin(), v.end(), 0.0) * field.grid().cell_volume();
}

ScalarField density(const ComplexField& psi) {
    ScalarField rho(psi.grid());
    simd::abs2(psi.values(), rho.values());
    return rho;
}

}  // namespace scratchsim::grid
