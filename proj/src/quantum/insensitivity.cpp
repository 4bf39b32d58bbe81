#include "scratchsim/quantum/insensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scratchsim/error.hpp"
#include "scratchsim/grid/fourier.hpp"

namespace scratchsim::quantum {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
    std::vector<double> x, w;
};

Rule gauss_rule(int n) {
    switch (n) {
        case 2: return {{-1 / std::sqrt(3.0), 1 / std::sqrt(3.0)}, {1.0, 1.0}};
        case 3: return {{-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, {5.0 / 9, 8.0 / 9, 5.0 / 9}};
        case 4: {
            const double a = std::sqrt(3.0 / 7 - 2.0 / 7 * std::sqrt(1.2)), b = std::sqrt(3.0 / 7 + 2.0 / 7 * std::sqrt(1.2));
            const double wa = (18 + std::sqrt(30.0)) / 36, wb = (18 - std::sqrt(30.0)) / 36;
            return {{-b, -a, a, b}, {wb, wa, wa, wb}};
        }
        default: throw DomainError("quadrature order must be 2, 3 or 4");
    }
}

struct Cubature {
    const scratch::ScratchedPotential& pot;
    double t;
    int dim;
    Rule rule;
    double leaf;
    double reach;  // tube radius
    int end_depth;

    bool near_tube(const Vec& center, double half_diag) const {
        for (std::size_t l = 0; l < pot.count(); ++l)
            if (pot.profile(l).project_within(center, reach + half_diag)) return true;
        return false;
    }

    double leaf_integral(const Vec& lo, const Vec& hi) const {
        const int n = static_cast<int>(rule.x.size());
        const int total = dim == 2 ? n * n : n * n * n;
        double sum = 0.0;
        for (int idx = 0; idx < total; ++idx) {
            int r = idx;
            Vec q;
            double w = 1.0;
            for (int a = 0; a < dim; ++a) {
                const int i = r % n;
                r /= n;
                q[a] = 0.5 * (lo[a] + hi[a]) + 0.5 * (hi[a] - lo[a]) * rule.x[i];
                w *= 0.5 * (hi[a] - lo[a]) * rule.w[i];
            }
            sum += w * std::fabs(pot.value(q, t) - pot.base().value(q, t));
        }
        return sum;
    }

    // f is only C1 across the normal plane at each curve end, which costs
    // the Gauss rule its order on cells cut by it. Those cells are bisected
    // further; the error then falls as (leaf / 2^depth)^2.
    bool cut_by_end(const Vec& lo, const Vec& hi) const {
        const Vec c = 0.5 * (lo + hi);
        const double half_diag = 0.5 * norm(hi - lo);
        for (std::size_t l = 0; l < pot.count(); ++l) {
            const auto& curve = pot.profile(l).curve();
            for (double s : {0.0, 1.0}) {
                const Vec e = curve.point(s);
                if (norm(c - e) > reach + half_diag) continue;
                const Vec d = curve.derivative(s);
                double mn = 1e300, mx = -1e300;
                for (int m = 0; m < (1 << dim); ++m) {
                    Vec corner;
                    for (int a = 0; a < dim; ++a) corner[a] = (m & (1 << a)) ? hi[a] : lo[a];
                    const double side = dot(corner - e, d);
                    mn = std::min(mn, side);
                    mx = std::max(mx, side);
                }
                if (mn < 0.0 && mx > 0.0) return true;
            }
        }
        return false;
    }

    template <class F>
    double over_children(const Vec& lo, const Vec& hi, F&& fn) const {
        const Vec c = 0.5 * (lo + hi);
        double sum = 0.0;
        for (int m = 0; m < (1 << dim); ++m) {
            Vec a = lo, b = hi;
            for (int ax = 0; ax < dim; ++ax) {
                if (m & (1 << ax)) a[ax] = c[ax];
                else b[ax] = c[ax];
            }
            sum += fn(a, b);
        }
        return sum;
    }

    double refine_end(const Vec& lo, const Vec& hi, int depth) const {
        if (depth == end_depth || !cut_by_end(lo, hi)) return leaf_integral(lo, hi);
        return over_children(lo, hi, [&](const Vec& a, const Vec& b) { return refine_end(a, b, depth + 1); });
    }

    double integrate(const Vec& lo, const Vec& hi) const {
        const Vec c = 0.5 * (lo + hi);
        const double half_diag = 0.5 * norm(hi - lo);
        if (!near_tube(c, half_diag)) return 0.0;
        double widest = 0.0;
        for (int a = 0; a < dim; ++a) widest = std::max(widest, hi[a] - lo[a]);
        if (widest <= leaf) {
            return refine_end(lo, hi, 0);
        }
        return over_children(lo, hi, [&](const Vec& a, const Vec& b) { return integrate(a, b); });
    }
};

}  // namespace

std::string InsensitivityTable::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "lambda,l1_potential,linf_fourier,l2_wavefunction\n";
    for (const auto& r : rows) os << r.lambda << ',' << r.l1_potential << ',' << r.linf_fourier << ',' << r.l2_wavefunction << '\n';
    return os.str();
}

double scratch_l1_difference(const scratch::ScratchedPotential& scratched, const grid::SpatialGrid& box, double t,
                             const InsensitivityOptions& options) {
    if (scratched.count() == 0) return 0.0;
    if (!(options.leaf_width > 0.0)) throw DomainError("leaf width must be positive");
    const int dim = box.dim();
    Cubature cub{scratched, t, dim, gauss_rule(options.quadrature_order),
                 options.leaf_width / std::sqrt(scratched.lambda()), scratched.tube_radius(), options.end_depth};
    Vec lo, hi;
    for (int a = 0; a < dim; ++a) {
        lo[a] = box.lo(a);
        hi[a] = box.hi(a);
    }
    return cub.integrate(lo, hi);
}

double scratch_linf_fourier(const scratch::ScratchedPotential& scratched, const grid::SpatialGrid& grid, double hbar,
                            double t) {
    if (scratched.count() == 0) return 0.0;
    const scratch::ScratchSampler sampler(scratched, grid);
    std::vector<double> u(grid.size());
    sampler(t, u);
    grid::ComplexField diff(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) diff[i] = u[i] - scratched.base().value(grid.point(i), t);
    const auto spec = grid::fourier_forward(diff, hbar);
    // Unitary DFT to continuum transform: sqrt(N) dV (2 pi hbar)^{-D/2}.
    const double scale = std::sqrt(double(grid.size())) * grid.cell_volume() /
                         std::pow(2 * M_PI * hbar, 0.5 * grid.dim());
    double best = 0.0;
    for (const auto& v : spec.values()) best = std::max(best, std::abs(v));
    return best * scale;
}

InsensitivityTable scratch_insensitivity(const QuantumSystem& system, const scratch::ScratchedPotential& scratched,
                                         const Wavefunction& psi0, const CheckpointSchedule& schedule,
                                         const std::vector<double>& lambdas, const InsensitivityOptions& options) {
    schedule.validate();
    if (lambdas.empty()) throw DomainError("lambda list is empty");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) throw DomainError("lambda must be positive");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw DomainError("lambda list must increase");
    }
    if (!system.potential) throw DomainError("quantum system has no potential");
    InsensitivityTable table;
    const double h = system.grid.min_spacing();
    table.grid_floor_lambda = 4.0 / (h * h);

    CheckpointSchedule ends{{schedule.initial(), schedule.final()}};
    Wavefunction reference = psi0;
    if (scratched.count() > 0) {
        Propagator base(system, options.propagation);
        reference = base.propagate(psi0, ends).snapshots.back();
    }
    for (double lambda : lambdas) {
        InsensitivityRow row;
        row.lambda = lambda;
        if (scratched.count() > 0) {
            const auto pot = scratched.with_lambda(lambda);
            row.l1_potential = scratch_l1_difference(pot, system.grid, schedule.initial(), options);
            row.linf_fourier = scratch_linf_fourier(pot, system.grid, system.hbar, schedule.initial());
            const scratch::ScratchSampler sampler(pot, system.grid);
            Propagator prop(system.grid, system.mass, system.hbar, sampler, !sampler.time_dependent(),
                            options.propagation);
            const auto psi = prop.propagate(psi0, ends).snapshots.back();
            double s = 0.0;
            for (std::size_t i = 0; i < psi.psi.size(); ++i) s += std::norm(psi.psi[i] - reference.psi[i]);
            row.l2_wavefunction = std::sqrt(s * system.grid.cell_volume());
        }
        table.rows.push_back(row);
    }
    return table;
}

bool decays(const std::vector<double>& lambdas, const std::vector<double>& values, double slack, double until) {
    if (lambdas.size() != values.size()) throw DomainError("decay check needs matching columns");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (lambdas[i] > until) break;
        if (values[i] > (1.0 + slack) * values[i - 1]) return false;
    }
    return true;
}

double log_log_slope(const std::vector<double>& lambdas, const std::vector<double>& values) {
    if (lambdas.size() != values.size() || lambdas.size() < 2) throw DomainError("slope fit needs two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(values[i] > 0.0)) throw DomainError("slope fit needs positive values");
        const double x = std::log(lambdas[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace scratchsim::quantum
