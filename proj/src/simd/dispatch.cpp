#include <cstdlib>
#include <string_view>

#include "scratchsim/simd/kernels.hpp"

namespace scratchsim::simd {

#ifndef SCRATCHSIM_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable& select() {
    if (const char* env = std::getenv("SCRATCHSIM_ISA"); env && std::string_view(env) == "scalar")
        return scalar_kernels();
    if (avx2_kernels() != nullptr && cpu_has_avx2()) return *avx2_kernels();
    return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace scratchsim::simd
