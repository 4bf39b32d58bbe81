#include <random>
#include <vector>

#include "doctest.h"
#include "scratchsim/simd/kernels.hpp"

using namespace scratchsim::simd;

namespace {

std::vector<cplx> random_complex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    std::vector<cplx> v(n);
    for (auto& z : v) z = {d(rng), d(rng)};
    return v;
}

std::vector<double> random_real(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

void check_equivalent(const KernelTable& ref, const KernelTable& alt) {
    std::mt19937_64 rng(7);
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 1001}) {
        CAPTURE(n);
        const auto a = random_complex(n, rng);
        const auto b = random_complex(n, rng);
        const auto x = random_real(n, rng);
        const auto y = random_real(n, rng);

        auto a1 = a, a2 = a;
        ref.cmul_inplace(a1.data(), b.data(), n);
        alt.cmul_inplace(a2.data(), b.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a1[i] - a2[i]) <= 1e-14 * (1 + std::abs(a1[i])));

        CHECK(ref.sum_abs2(a.data(), n) == doctest::Approx(alt.sum_abs2(a.data(), n)).epsilon(1e-13));
        CHECK(ref.sum_abs2_diff(a.data(), b.data(), n) ==
              doctest::Approx(alt.sum_abs2_diff(a.data(), b.data(), n)).epsilon(1e-13));
        CHECK(ref.sum_abs_diff(x.data(), y.data(), n) ==
              doctest::Approx(alt.sum_abs_diff(x.data(), y.data(), n)).epsilon(1e-13));

        std::vector<double> o1(n), o2(n);
        ref.abs2(a.data(), o1.data(), n);
        alt.abs2(a.data(), o2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-15));

        auto y1 = y, y2 = y;
        ref.axpy(y1.data(), 0.37, x.data(), n);
        alt.axpy(y2.data(), 0.37, x.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));

        std::vector<std::int32_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::int32_t>(rng() % 5) - 1;
        std::vector<double> s1(4, 0.0), s2(4, 0.0);
        ref.label_sums(x.data(), labels.data(), n, s1.data(), 4);
        alt.label_sums(x.data(), labels.data(), n, s2.data(), 4);
        for (int k = 0; k < 4; ++k) CHECK(s1[k] == doctest::Approx(s2[k]).epsilon(1e-13));
    }
}

}  // namespace

TEST_CASE("scalar kernels match hand-computed values") {
    const auto& k = scalar_kernels();
    std::vector<cplx> a{{1, 2}, {3, -1}};
    const std::vector<cplx> b{{0, 1}, {2, 0}};
    k.cmul_inplace(a.data(), b.data(), 2);
    CHECK(a[0] == cplx(-2, 1));
    CHECK(a[1] == cplx(6, -2));
    CHECK(k.sum_abs2(a.data(), 2) == doctest::Approx(5 + 40));
    const std::vector<double> v{1.0, 2.0, 3.0};
    const std::vector<std::int32_t> l{0, 1, 0};
    std::vector<double> sums(2, 0.0);
    k.label_sums(v.data(), l.data(), 3, sums.data(), 2);
    CHECK(sums[0] == 4.0);
    CHECK(sums[1] == 2.0);
}

TEST_CASE("avx2 kernels are equivalent to the scalar reference") {
    const KernelTable* avx = avx2_kernels();
    if (avx == nullptr || !cpu_has_avx2()) {
        MESSAGE("AVX2 variant unavailable on this machine; skipping");
        return;
    }
    check_equivalent(scalar_kernels(), *avx);
}

TEST_CASE("dispatch picks a table consistent with the CPU") {
    const auto& t = active();
    if (cpu_has_avx2() && avx2_kernels() != nullptr && std::getenv("SCRATCHSIM_ISA") == nullptr)
        CHECK(t.isa == Isa::avx2);
    check_equivalent(scalar_kernels(), t);
}
