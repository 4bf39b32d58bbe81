#pragma once

#include <complex>
#include <memory>
#include <span>

#include "scratchsim/grid/field.hpp"

namespace scratchsim::grid {

/// Reusable in-place FFT over a D-dimensional shape, unnormalised, in FFTW's
/// natural (uncentred) frequency order. Backed by FFTW.
class FftPlan {
public:
    explicit FftPlan(const SpatialGrid& grid);
    ~FftPlan();
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    /// exp(-i k x) convention.
    void forward(std::span<std::complex<double>> data);
    void backward(std::span<std::complex<double>> data);
    std::size_t size() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Signed integer frequency of FFT index i on an axis of n points.
inline long fft_frequency(std::size_t i, std::size_t n) {
    return i < (n + 1) / 2 ? long(i) : long(i) - long(n);
}

/// Unitary DFT onto the dual momentum grid (centred order). Phases are
/// relative to the first sample of the position grid.
ComplexField fourier_forward(const ComplexField& field, double hbar = 1.0);

/// Inverse of fourier_forward.
ComplexField fourier_inverse(const ComplexField& spectrum);

/// Momentum-space probability density of a normalised wavefunction: the
/// values integrate to sum |psi|^2 dV over the momentum grid.
ScalarField momentum_density(const ComplexField& psi, double hbar = 1.0);

}  // namespace scratchsim::grid
