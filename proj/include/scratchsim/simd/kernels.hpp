#pragma once

// Data-parallel inner loops shared by the grid, propagator and particle
// integrator. Each kernel has a scalar reference and an AVX2/FMA variant; the
// variant is chosen once at startup from the CPU feature flags. Setting the
// environment variable SCRATCHSIM_ISA=scalar forces the reference path.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace scratchsim::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    // a[i] *= b[i]
    void (*cmul_inplace)(cplx* a, const cplx* b, std::size_t n);
    // sum |a[i]|^2
    double (*sum_abs2)(const cplx* a, std::size_t n);
    // out[i] = |a[i]|^2
    void (*abs2)(const cplx* a, double* out, std::size_t n);
    // sum |a[i] - b[i]|^2
    double (*sum_abs2_diff)(const cplx* a, const cplx* b, std::size_t n);
    // sum |a[i] - b[i]|
    double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
    // sums[k] += values[i] for labels[i] == k, k in [0, nlabels)
    void (*label_sums)(const double* values, const std::int32_t* labels, std::size_t n,
                       double* sums, std::int32_t nlabels);
};

const KernelTable& scalar_kernels();
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();
bool cpu_has_avx2();
/// The table selected for this process.
const KernelTable& active();
std::string_view isa_name(Isa isa);

inline void cmul_inplace(std::span<cplx> a, std::span<const cplx> b) {
    active().cmul_inplace(a.data(), b.data(), a.size());
}
inline double sum_abs2(std::span<const cplx> a) { return active().sum_abs2(a.data(), a.size()); }
inline void abs2(std::span<const cplx> a, std::span<double> out) {
    active().abs2(a.data(), out.data(), a.size());
}
inline double sum_abs2_diff(std::span<const cplx> a, std::span<const cplx> b) {
    return active().sum_abs2_diff(a.data(), b.data(), a.size());
}
inline double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
    return active().sum_abs_diff(a.data(), b.data(), a.size());
}
inline void axpy(std::span<double> y, double alpha, std::span<const double> x) {
    active().axpy(y.data(), alpha, x.data(), y.size());
}
inline void label_sums(std::span<const double> values, std::span<const std::int32_t> labels,
                       std::span<double> sums) {
    active().label_sums(values.data(), labels.data(), values.size(), sums.data(),
                        static_cast<std::int32_t>(sums.size()));
}

}  // namespace scratchsim::simd
