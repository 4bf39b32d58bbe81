#include "scratchsim/classical/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scratchsim/error.hpp"
#include "scratchsim/scratch/profile.hpp"
#include "scratchsim/simd/kernels.hpp"

namespace scratchsim::classical {

ClassicalEnsemble initialize_lines(const std::vector<geometry::ScratchCurve>& lines, double mass, double t_i,
                                   double t_f) {
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    if (!(t_f > t_i)) throw DomainError("t_f must exceed t_i");
    if (lines.empty()) throw DomainError("no scratches to place particles on");
    ClassicalEnsemble e;
    e.dim = lines.front().dim();
    e.mass = mass;
    for (std::size_t l = 0; l < lines.size(); ++l) {
        const Vec a = lines[l].point(0.0), b = lines[l].point(1.0);
        if (!(norm(b - a) > 0.0)) throw DomainError("zero-length itinerary for particle " + std::to_string(l));
        e.particles.push_back({a, (mass / (t_f - t_i)) * (b - a), l});
    }
    return e;
}

ClassicalEnsemble initialize_on_scratches(const std::vector<geometry::ScratchCurve>& curves,
                                          const geometry::MomentumConditioning& mc, double mass) {
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    if (curves.empty()) throw DomainError("no scratches to place particles on");
    if (mc.speed.size() != curves.size())
        throw DomainError("conditioning has " + std::to_string(mc.speed.size()) + " particles, curves have " +
                          std::to_string(curves.size()));
    ClassicalEnsemble e;
    e.dim = curves.front().dim();
    e.mass = mass;
    for (std::size_t l = 0; l < curves.size(); ++l) {
        const double s1 = curves[l].knots().front();
        e.particles.push_back({curves[l].point(s1), geometry::checkpoint_momentum(curves[l], mc, l, 0, mass), l});
    }
    return e;
}

double stiffness_step(double lambda, double u_max, double mass) {
    if (!(lambda > 0.0) || !(u_max > 0.0) || !(mass > 0.0))
        throw DomainError("stiffness step needs positive lambda, U_max and mass");
    return (1.0 / 20.0) * 2.0 * M_PI / std::sqrt(2.0 * lambda * u_max / mass);
}

double min_pairwise_distance(const std::vector<Vec>& points) {
    if (points.size() < 2) return std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a][0] < points[b][0]; });
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Vec& a = points[order[i]];
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const Vec& b = points[order[j]];
            const double dx = b[0] - a[0];
            if (dx * dx >= best2) break;
            best2 = std::min(best2, norm2(b - a));
        }
    }
    return std::sqrt(best2);
}

namespace {

struct Soa {
    std::size_t n;
    std::vector<double> q, p, f;  // [axis * n + i]

    Vec get(const std::vector<double>& a, std::size_t i) const { return {a[i], a[n + i], a[2 * n + i]}; }
    void set(std::vector<double>& a, std::size_t i, const Vec& v) const {
        for (int k = 0; k < 3; ++k) a[k * n + i] = v[k];
    }
};

}  // namespace

IntegrationResult integrate(const ClassicalEnsemble& ensemble, const quantum::Potential& potential,
                            const std::vector<double>& times, const IntegrationOptions& options,
                            const std::vector<geometry::ScratchCurve>* curves) {
    if (times.size() < 2) throw DomainError("need at least two checkpoint times");
    for (std::size_t j = 1; j < times.size(); ++j)
        if (!(times[j] > times[j - 1])) throw DomainError("checkpoint times must increase");
    if (!(options.max_step > 0.0)) throw DomainError("max_step must be positive");
    const std::size_t n = ensemble.size();
    if (n == 0) throw DomainError("empty ensemble");
    if (curves && curves->size() != n) throw DomainError("deviation tracking needs one curve per particle");
    const int dim = ensemble.dim;
    const double m = ensemble.mass;
    const bool check_energy = options.energy_tolerance > 0.0 && !potential.time_dependent();

    std::vector<scratch::ScratchProfile> profiles;
    if (curves)
        for (const auto& c : *curves) profiles.emplace_back(c);

    Soa s{n, std::vector<double>(3 * n), std::vector<double>(3 * n), std::vector<double>(3 * n)};
    for (std::size_t i = 0; i < n; ++i) {
        s.set(s.q, i, ensemble.particles[i].q);
        s.set(s.p, i, ensemble.particles[i].p);
    }
    std::vector<double> u(n);
    auto forces = [&](double t) {
        for (std::size_t i = 0; i < n; ++i) {
            Vec g;
            potential.value_gradient(s.get(s.q, i), t, u[i], g);
            s.set(s.f, i, -g);
        }
    };
    auto energy = [&](std::size_t i) { return 0.5 * norm2(s.get(s.p, i)) / m + u[i]; };

    IntegrationResult res;
    res.max_deviation.assign(n, 0.0);
    res.min_pair_distance = std::numeric_limits<double>::infinity();
    std::vector<double> scale(n);
    std::vector<Vec> positions(n);

    auto describe = [&](double t) {
        std::ostringstream os;
        os << "t = " << t << ", dt = " << res.step << ", lambda = " << options.lambda;
        return os.str();
    };
    auto observe = [&](double t, bool record) {
        for (std::size_t i = 0; i < n; ++i) {
            const Vec q = s.get(s.q, i);
            positions[i] = q;
            if (options.confine)
                for (int a = 0; a < dim; ++a)
                    if (!(q[a] >= options.box_lo[a] && q[a] <= options.box_hi[a])) {
                        std::ostringstream os;
                        os << "particle " << ensemble.particles[i].id << " left the domain (" << describe(t) << ")";
                        throw ConfinementError(os.str());
                    }
            if (check_energy) {
                const double drift = std::fabs(energy(i) - res.initial_energy[i]) / scale[i];
                res.max_energy_drift = std::max(res.max_energy_drift, drift);
                if (drift > options.energy_tolerance) {
                    std::ostringstream os;
                    os << "energy drift " << drift << " of particle " << ensemble.particles[i].id << " exceeds "
                       << options.energy_tolerance << " (" << describe(t) << ")";
                    throw StabilityError(os.str());
                }
            }
            if (curves) res.max_deviation[i] = std::max(res.max_deviation[i], std::sqrt(profiles[i].f(q)));
            if (record) res.trajectory.push_back({t, ensemble.particles[i].id, q, s.get(s.p, i), energy(i)});
        }
        if (n > 1) {
            const double d = min_pairwise_distance(positions);
            res.min_pair_distance = std::min(res.min_pair_distance, d);
            if (options.min_pair_distance > 0.0 && d < options.min_pair_distance) {
                std::ostringstream os;
                os << "particles came within " << d << " < " << options.min_pair_distance << " (" << describe(t)
                   << ")";
                throw ConfinementError(os.str());
            }
        }
    };
    auto snapshot = [&]() {
        std::vector<ParticleState> snap(n);
        for (std::size_t i = 0; i < n; ++i) snap[i] = {s.get(s.q, i), s.get(s.p, i), ensemble.particles[i].id};
        res.snapshots.push_back(std::move(snap));
    };

    double t = times.front();
    forces(t);
    res.initial_energy.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        res.initial_energy[i] = energy(i);
        scale[i] = std::max(std::fabs(res.initial_energy[i]), 0.5 * norm2(s.get(s.p, i)) / m);
        if (!(scale[i] > 0.0)) scale[i] = 1.0;
    }
    res.step = options.max_step;
    observe(t, true);
    snapshot();

    std::span<double> q(s.q), p(s.p);
    std::span<const double> f(s.f);
    for (std::size_t j = 1; j < times.size(); ++j) {
        const double span = times[j] - times[j - 1];
        const auto steps = static_cast<std::size_t>(std::ceil(span / options.max_step - 1e-12));
        const double h = span / double(std::max<std::size_t>(steps, 1));
        for (std::size_t k = 0; k < steps; ++k) {
            simd::axpy(p, 0.5 * h, f);
            simd::axpy(q, h / m, p);
            t = times[j - 1] + h * double(k + 1);
            if (k + 1 == steps) t = times[j];
            forces(t);
            simd::axpy(p, 0.5 * h, f);
            ++res.steps;
            const bool record = options.record_every > 0 && res.steps % options.record_every == 0;
            observe(t, record || k + 1 == steps);
        }
        snapshot();
    }
    return res;
}

OccupancyRecord occupancy(const std::vector<std::vector<ParticleState>>& snapshots,
                          const grid::RegionPartition& position, const grid::RegionPartition* momentum) {
    OccupancyRecord rec;
    rec.has_momentum = momentum != nullptr;
    for (const auto& snap : snapshots) {
        const double n = double(snap.size());
        std::vector<int> c(position.count(), 0), ct(momentum ? momentum->count() : 0, 0);
        for (const auto& ps : snap) {
            const int k = position.label_of(ps.q);
            if (k == 0) throw ConfinementError("particle " + std::to_string(ps.id) + " outside every position region");
            ++c[k - 1];
            if (momentum) {
                const int kt = momentum->label_of(ps.p);
                if (kt == 0)
                    throw ConfinementError("particle " + std::to_string(ps.id) + " outside every momentum region");
                ++ct[kt - 1];
            }
        }
        std::vector<double> pi(c.size()), pit(ct.size());
        for (std::size_t k = 0; k < c.size(); ++k) pi[k] = c[k] / n;
        for (std::size_t k = 0; k < ct.size(); ++k) pit[k] = ct[k] / n;
        rec.counts.push_back(c);
        rec.counts_tilde.push_back(ct);
        rec.pi.push_back(pi);
        rec.pi_tilde.push_back(pit);
    }
    return rec;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows, int dim) {
    std::ostringstream os;
    os.precision(17);
    os << "t,l";
    for (int a = 1; a <= dim; ++a) os << ",q" << a;
    for (int a = 1; a <= dim; ++a) os << ",p" << a;
    os << ",E\n";
    for (const auto& r : rows) {
        os << r.t << ',' << r.l;
        for (int a = 0; a < dim; ++a) os << ',' << r.q[a];
        for (int a = 0; a < dim; ++a) os << ',' << r.p[a];
        os << ',' << r.energy << '\n';
    }
    return os.str();
}

std::string occupancy_csv(const OccupancyRecord& rec, const std::vector<double>& times) {
    if (times.size() != rec.counts.size()) throw DomainError("occupancy record and times differ in length");
    std::ostringstream os;
    os.precision(17);
    os << "t_j,k,pi_k,pi_tilde_k,count,count_tilde\n";
    for (std::size_t j = 0; j < times.size(); ++j) {
        const std::size_t K = std::max(rec.counts[j].size(), rec.counts_tilde[j].size());
        for (std::size_t k = 0; k < K; ++k) {
            os << times[j] << ',' << k + 1 << ',';
            if (k < rec.pi[j].size()) os << rec.pi[j][k];
            os << ',';
            if (k < rec.pi_tilde[j].size()) os << rec.pi_tilde[j][k];
            os << ',';
            if (k < rec.counts[j].size()) os << rec.counts[j][k];
            os << ',';
            if (k < rec.counts_tilde[j].size()) os << rec.counts_tilde[j][k];
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace scratchsim::classical
