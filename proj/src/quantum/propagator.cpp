#include "scratchsim/quantum/propagator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "scratchsim/error.hpp"
#include "scratchsim/simd/kernels.hpp"

namespace scratchsim::quantum {

using cplx = std::complex<double>;

void CheckpointSchedule::validate() const {
    if (times.size() < 2) throw DomainError("checkpoint schedule needs K >= 2 times");
    for (std::size_t j = 1; j < times.size(); ++j)
        if (!(times[j] > times[j - 1])) throw DomainError("checkpoint times must be strictly increasing");
}

double Wavefunction::norm2() const { return simd::sum_abs2(psi.values()) * psi.grid().cell_volume(); }

Wavefunction gaussian_packet(const grid::SpatialGrid& grid, const Vec& center, double sigma, const Vec& momentum,
                             double hbar, double t) {
    if (!(sigma > 0.0)) throw DomainError("packet width must be positive");
    grid::ComplexField psi(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec q = grid.point(i);
        double r2 = 0.0, phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            r2 += (q[a] - center[a]) * (q[a] - center[a]);
            phase += momentum[a] * q[a] / hbar;
        }
        psi[i] = std::polar(std::exp(-r2 / (4.0 * sigma * sigma)), phase);
    }
    Wavefunction wf{std::move(psi), t};
    const double s = 1.0 / std::sqrt(wf.norm2());
    for (auto& z : wf.psi.values()) z *= s;
    return wf;
}

Propagator::Propagator(grid::SpatialGrid grid, double mass, double hbar, PotentialSampler sampler,
                       bool static_potential, PropagationOptions options)
    : grid_(std::move(grid)),
      mass_(mass),
      hbar_(hbar),
      sampler_(std::move(sampler)),
      static_(static_potential),
      options_(options),
      plan_(grid_) {
    if (!(mass_ > 0.0) || !(hbar_ > 0.0)) throw DomainError("mass and hbar must be positive");
    if (!(options_.max_step > 0.0)) throw DomainError("max_step must be positive");
    k2_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        const auto idx = grid_.unflatten(i);
        double s = 0.0;
        for (int a = 0; a < grid_.dim(); ++a) {
            const double k = 2.0 * std::numbers::pi * double(grid::fft_frequency(idx[a], grid_.extent(a))) /
                             grid_.length(a);
            s += k * k;
        }
        k2_[i] = s;
        bool edge = false;
        for (int a = 0; a < grid_.dim(); ++a)
            if (idx[a] == 0 || idx[a] + 1 == grid_.extent(a)) edge = true;
        if (edge) edge_indices_.push_back(i);
    }
    if (static_) {
        potential_cache_.resize(grid_.size());
        sampler_(0.0, potential_cache_);
        for (double u : potential_cache_)
            if (!std::isfinite(u)) throw DomainError("potential has non-finite samples");
    }
}

Propagator::Propagator(const QuantumSystem& system, PropagationOptions options)
    : Propagator(
          system.grid, system.mass, system.hbar,
          [pot = system.potential, g = system.grid](double t, std::span<double> out) {
              for (std::size_t i = 0; i < g.size(); ++i) out[i] = pot->value(g.point(i), t);
          },
          !system.potential->time_dependent(), options) {}

const std::vector<cplx>& Propagator::kinetic_factor(double dt) {
    auto it = kinetic_cache_.find(dt);
    if (it != kinetic_cache_.end()) return it->second;
    std::vector<cplx> f(grid_.size());
    const double c = -hbar_ * dt / (2.0 * mass_);
    const double norm = 1.0 / double(grid_.size());  // folds the inverse-FFT scaling in
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(norm, c * k2_[i]);
    if (kinetic_cache_.size() > 8) kinetic_cache_.clear();
    return kinetic_cache_.emplace(dt, std::move(f)).first->second;
}

void Propagator::potential_factor(double t_mid, double dt, std::vector<cplx>& out) {
    out.resize(grid_.size());
    std::vector<double> u(grid_.size());
    sampler_(t_mid, u);
    const double c = -dt / (2.0 * hbar_);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::polar(1.0, c * u[i]);
}

double Propagator::edge_mass(const grid::ComplexField& psi) const {
    double s = 0.0;
    for (auto i : edge_indices_) s += std::norm(psi[i]);
    return s * grid_.cell_volume();
}

std::size_t Propagator::evolve(Wavefunction& wf, double t_target) {
    if (!(wf.psi.grid() == grid_)) throw DomainError("wavefunction lives on a different grid");
    const double span = t_target - wf.t;
    if (span == 0.0) return 0;
    const auto n = static_cast<std::size_t>(std::ceil(std::fabs(span) / options_.max_step - 1e-9));
    const std::size_t steps = std::max<std::size_t>(n, 1);
    const double dt = span / double(steps);
    const auto& kin = kinetic_factor(dt);

    std::vector<cplx> half;
    const std::vector<cplx>* half_ptr = nullptr;
    if (static_) {
        auto it = half_kick_cache_.find(dt);
        if (it == half_kick_cache_.end()) {
            std::vector<cplx> f(grid_.size());
            const double c = -dt / (2.0 * hbar_);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(1.0, c * potential_cache_[i]);
            if (half_kick_cache_.size() > 8) half_kick_cache_.clear();
            it = half_kick_cache_.emplace(dt, std::move(f)).first;
        }
        half_ptr = &it->second;
    }

    auto values = wf.psi.values();
    const double t0 = wf.t;
    for (std::size_t s = 0; s < steps; ++s) {
        if (!static_) {
            potential_factor(t0 + (double(s) + 0.5) * dt, dt, half);
            half_ptr = &half;
        }
        simd::cmul_inplace(values, *half_ptr);
        plan_.forward(values);
        simd::cmul_inplace(values, kin);
        plan_.backward(values);
        simd::cmul_inplace(values, *half_ptr);
    }
    wf.t = t_target;
    return steps;
}

PropagationResult Propagator::propagate(const Wavefunction& psi0, const CheckpointSchedule& schedule) {
    schedule.validate();
    if (std::fabs(psi0.t - schedule.initial()) > 1e-12 * std::max(1.0, std::fabs(psi0.t)))
        throw DomainError("initial wavefunction time does not match the first checkpoint");
    const double n0 = psi0.norm2();
    if (std::fabs(n0 - 1.0) > std::max(options_.norm_tolerance, 1e-12))
        throw DomainError("initial wavefunction is not normalised (norm^2 = " + std::to_string(n0) + ")");

    PropagationResult result;
    Wavefunction wf = psi0;
    wf.t = schedule.initial();
    result.max_edge_mass = edge_mass(wf.psi);
    result.snapshots.push_back(wf);
    for (std::size_t j = 1; j < schedule.size(); ++j) {
        result.steps += evolve(wf, schedule.times[j]);
        wf.t = schedule.times[j];
        const double drift = std::fabs(wf.norm2() - 1.0);
        result.max_norm_drift = std::max(result.max_norm_drift, drift);
        if (drift > options_.norm_tolerance) {
            std::ostringstream os;
            os << "norm drift " << drift << " exceeds tolerance at step " << result.steps << " (t = " << wf.t
               << ")";
            throw StabilityError(os.str());
        }
        result.max_edge_mass = std::max(result.max_edge_mass, edge_mass(wf.psi));
        result.snapshots.push_back(wf);
    }
    result.confinement_warning = result.max_edge_mass > options_.edge_eps;
    return result;
}

PropagationResult propagate(const QuantumSystem& system, const Wavefunction& psi0,
                            const CheckpointSchedule& schedule, const PropagationOptions& options) {
    Propagator p(system, options);
    return p.propagate(psi0, schedule);
}

std::vector<double> occupation_probabilities(const Wavefunction& psi, const grid::RegionPartition& partition,
                                             double hbar) {
    if (partition.space() == grid::Space::position)
        return grid::integrate_regions(grid::density(psi.psi), partition);
    return grid::integrate_regions(grid::momentum_density(psi.psi, hbar), partition);
}

}  // namespace scratchsim::quantum
