#include "scratchsim/simd/kernels.hpp"

#include <cmath>

namespace scratchsim::simd {
namespace {

void cmul_inplace(cplx* a, const cplx* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        a[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
    }
}

double sum_abs2(const cplx* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

void abs2(const cplx* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
}

double sum_abs2_diff(const cplx* a, const cplx* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dr = a[i].real() - b[i].real();
        const double di = a[i].imag() - b[i].imag();
        s += dr * dr + di * di;
    }
    return s;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void label_sums(const double* values, const std::int32_t* labels, std::size_t n, double* sums,
                std::int32_t nlabels) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t k = labels[i];
        if (k >= 0 && k < nlabels) sums[k] += values[i];
    }
}

constexpr KernelTable kTable{Isa::scalar, cmul_inplace, sum_abs2,   abs2,
                             sum_abs2_diff, sum_abs_diff, axpy, label_sums};

}  // namespace

const KernelTable& scalar_kernels() { return kTable; }

}  // namespace scratchsim::simd
