#include "scratchsim/grid/fourier.hpp"

#include <fftw3.h>

#include <cmath>

#include "scratchsim/error.hpp"
#include "scratchsim/simd/kernels.hpp"

namespace scratchsim::grid {

struct FftPlan::Impl {
    std::size_t n = 0;
    fftw_complex* buffer = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buffer) fftw_free(buffer);
    }
};

FftPlan::FftPlan(const SpatialGrid& grid) : impl_(std::make_unique<Impl>()) {
    int dims[3];
    for (int a = 0; a < grid.dim(); ++a) dims[a] = static_cast<int>(grid.extent(a));
    impl_->n = grid.size();
    impl_->buffer = fftw_alloc_complex(impl_->n);
    if (!impl_->buffer) throw Error("FFT buffer allocation failed");
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    impl_->fwd = fftw_plan_dft(grid.dim(), dims, impl_->buffer, impl_->buffer, FFTW_FORWARD, flags);
    impl_->bwd = fftw_plan_dft(grid.dim(), dims, impl_->buffer, impl_->buffer, FFTW_BACKWARD, flags);
    if (!impl_->fwd || !impl_->bwd) throw Error("FFTW planning failed");
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

std::size_t FftPlan::size() const noexcept { return impl_->n; }

void FftPlan::forward(std::span<std::complex<double>> data) {
    if (data.size() != impl_->n) throw DomainError("FFT size mismatch");
    fftw_execute_dft(impl_->fwd, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
}

void FftPlan::backward(std::span<std::complex<double>> data) {
    if (data.size() != impl_->n) throw DomainError("FFT size mismatch");
    fftw_execute_dft(impl_->bwd, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
}

namespace {

// Index of the centred-order sample on an axis holding FFT index i.
std::size_t centred_index(std::size_t i, std::size_t n) {
    return static_cast<std::size_t>(fft_frequency(i, n) + long(n / 2));
}

// out[centred(i)] = in[i] (forward) or out[i] = in[centred(i)] (inverse).
void shift(const SpatialGrid& g, std::span<const std::complex<double>> in,
           std::span<std::complex<double>> out, bool to_centred) {
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        auto idx = g.unflatten(flat);
        for (int a = 0; a < g.dim(); ++a) idx[a] = centred_index(idx[a], g.extent(a));
        const std::size_t c = g.flatten(idx);
        if (to_centred)
            out[c] = in[flat];
        else
            out[flat] = in[c];
    }
}

}  // namespace

ComplexField fourier_forward(const ComplexField& field, double hbar) {
    const auto& g = field.grid();
    if (g.space() != Space::position) throw DomainError("fourier_forward expects a position-space field");
    std::vector<std::complex<double>> work(field.values().begin(), field.values().end());
    FftPlan plan(g);
    plan.forward(work);
    const double scale = 1.0 / std::sqrt(double(g.size()));
    for (auto& z : work) z *= scale;
    ComplexField out(g.momentum_grid(hbar));
    shift(g, work, out.values(), true);
    return out;
}

ComplexField fourier_inverse(const ComplexField& spectrum) {
    const auto& g = spectrum.grid();
    if (g.space() != Space::momentum) throw DomainError("fourier_inverse expects a momentum-space field");
    std::vector<std::complex<double>> work(g.size());
    shift(g, spectrum.values(), work, false);
    FftPlan plan(g);
    plan.backward(work);
    const double scale = 1.0 / std::sqrt(double(g.size()));
    for (auto& z : work) z *= scale;
    return ComplexField(g.position_grid(), std::move(work));
}

ScalarField momentum_density(const ComplexField& psi, double hbar) {
    const ComplexField phi = fourier_forward(psi, hbar);
    ScalarField rho(phi.grid());
    simd::abs2(phi.values(), rho.values());
    // Unitary DFT keeps sum |.|^2; rescale so that sum rho dp^D = sum |psi|^2 dq^D.
    const double s = psi.grid().cell_volume() / phi.grid().cell_volume();
    for (auto& r : rho.values()) r *= s;
    return rho;
}

}  // namespace scratchsim::grid
