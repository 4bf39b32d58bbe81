// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.
#include "scratchsim/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace scratchsim::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Two complex numbers per register, interleaved (re, im, re, im).
void cmul_inplace(cplx* a, const cplx* b, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        const __m256d b_re = _mm256_movedup_pd(vb);            // br br
        const __m256d b_im = _mm256_permute_pd(vb, 0xF);       // bi bi
        const __m256d a_sw = _mm256_permute_pd(va, 0x5);       // ai ar
        const __m256d t = _mm256_mul_pd(a_sw, b_im);           // ai*bi, ar*bi
        _mm256_storeu_pd(pa + 2 * i, _mm256_fmaddsub_pd(va, b_re, t));
    }
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        a[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
    }
}

double sum_abs2(const cplx* a, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(a);
    const std::size_t m = 2 * n;
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= m; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(p + i);
        const __m256d x1 = _mm256_loadu_pd(p + i + 4);
        acc0 = _mm256_fmadd_pd(x0, x0, acc0);
        acc1 = _mm256_fmadd_pd(x1, x1, acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < m; ++i) s += p[i] * p[i];
    return s;
}

void abs2(const cplx* a, double* out, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x0 = _mm256_loadu_pd(p + 2 * i);      // r0 i0 r1 i1
        const __m256d x1 = _mm256_loadu_pd(p + 2 * i + 4);  // r2 i2 r3 i3
        const __m256d s0 = _mm256_mul_pd(x0, x0);
        const __m256d s1 = _mm256_mul_pd(x1, x1);
        // hadd gives (s0[0]+s0[1], s1[0]+s1[1], s0[2]+s0[3], s1[2]+s1[3])
        const __m256d h = _mm256_hadd_pd(s0, s1);
        _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0xD8));
    }
    for (; i < n; ++i) out[i] = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
}

double sum_abs2_diff(const cplx* a, const cplx* b, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    const std::size_t m = 2 * n;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < m; ++i) s += (pa[i] - pb[i]) * (pa[i] - pb[i]);
    return s;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void label_sums(const double* values, const std::int32_t* labels, std::size_t n, double* sums,
                std::int32_t nlabels) {
    for (std::int32_t k = 0; k < nlabels; ++k) {
        const __m128i vk = _mm_set1_epi32(k);
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            const __m128i l = _mm_loadu_si128(reinterpret_cast<const __m128i*>(labels + i));
            const __m256i mask = _mm256_cvtepi32_epi64(_mm_cmpeq_epi32(l, vk));
            acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_castsi256_pd(mask), _mm256_loadu_pd(values + i)));
        }
        double s = hsum(acc);
        for (; i < n; ++i)
            if (labels[i] == k) s += values[i];
        sums[k] += s;
    }
}

constexpr KernelTable kTable{Isa::avx2,    cmul_inplace, sum_abs2,   abs2,
                             sum_abs2_diff, sum_abs_diff, axpy, label_sums};

}  // namespace

const KernelTable* avx2_kernels() { return &kTable; }

}  // namespace scratchsim::simd
