#include "scratchsim/geometry/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "scratchsim/error.hpp"

namespace scratchsim::geometry {

using grid::Box;
using grid::Region;

namespace {

Box shrink_clip(const Box& b, int dim, double extent, double margin) {
    Box c;
    const double mu = margin * extent;
    for (int a = 0; a < dim; ++a) {
        c.lo[a] = std::max(b.lo[a], -extent) + mu;
        c.hi[a] = std::min(b.hi[a], extent) - mu;
    }
    for (int a = dim; a < 3; ++a) c.lo[a] = c.hi[a] = 0.0;
    return c;
}

/// Centroid of the largest shrunk, clipped box of a region.
Vec region_centroid(const Region& r, int dim, double extent, double margin) {
    Vec best;
    double best_vol = -1.0;
    for (const auto& b : r.boxes) {
        const Box c = shrink_clip(b, dim, extent, margin);
        double vol = 1.0;
        for (int a = 0; a < dim; ++a) vol *= std::max(0.0, c.hi[a] - c.lo[a]);
        if (vol > best_vol) {
            best_vol = vol;
            best = 0.5 * (c.lo + c.hi);
        }
    }
    return best;
}

std::vector<double> secants(const ScratchCurve& c, const std::vector<double>& t) {
    std::vector<double> s;
    for (std::size_t j = 0; j + 1 < t.size(); ++j) s.push_back((c.knots()[j + 1] - c.knots()[j]) / (t[j + 1] - t[j]));
    return s;
}

}  // namespace

RayInterval ray_interval(const Region& region, const Vec& d, int dim, double extent, double margin) {
    RayInterval best;
    for (const auto& b : region.boxes) {
        const Box c = shrink_clip(b, dim, extent, margin);
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (int a = 0; a < dim; ++a) {
            if (d[a] == 0.0) {
                if (c.lo[a] > 0.0 || c.hi[a] < 0.0) hi = -1.0;
                continue;
            }
            double t0 = c.lo[a] / d[a], t1 = c.hi[a] / d[a];
            if (t0 > t1) std::swap(t0, t1);
            lo = std::max(lo, t0);
            hi = std::min(hi, t1);
        }
        if (hi - lo > best.hi - best.lo) best = {lo, hi};
    }
    return best;
}

MomentumConditioning condition_momenta(std::vector<ScratchCurve>& curves, const grid::RegionPartition& momentum,
                                       const std::vector<std::vector<int>>& counts, const ConditioningOptions& opt) {
    if (momentum.space() != grid::Space::momentum) throw DomainError("conditioning needs a momentum partition");
    const std::size_t N = curves.size();
    if (N == 0) throw DomainError("no curves to condition");
    const std::size_t K = curves.front().knot_count();
    const int dim = curves.front().dim();
    if (counts.size() != K || opt.times.size() != K)
        throw DomainError("counts and times must have one entry per checkpoint");
    if (!(opt.mass > 0.0) || !(opt.momentum_extent > 0.0)) throw DomainError("mass and momentum extent must be positive");
    const int n = momentum.count();
    for (const auto& row : counts) {
        if (static_cast<int>(row.size()) != n) throw DomainError("momentum counts have the wrong region count");
        int total = 0;
        for (int v : row) total += v;
        if (total != static_cast<int>(N)) throw DomainError("momentum counts must sum to the particle count");
    }
    for (const auto& c : curves)
        if (c.knot_count() != K) throw DomainError("all curves need one knot per checkpoint");
    for (std::size_t j = 1; j < K; ++j)
        if (!(opt.times[j] > opt.times[j - 1])) throw DomainError("checkpoint times must increase");

    auto fits = [&](const Vec& d, int k) {
        return !ray_interval(momentum.region(k), d, dim, opt.momentum_extent, opt.margin).empty();
    };

    MomentumConditioning mc;
    mc.region.assign(N, std::vector<int>(K, 0));
    mc.direction.assign(N, std::vector<Vec>(K));
    mc.speed.assign(N, std::vector<double>(K, 0.0));
    std::vector<std::pair<std::size_t, std::size_t>> failed;

    for (std::size_t j = 0; j < K; ++j) {
        std::vector<int> room = counts[j];
        // Particles whose tangent already points into a region with room keep it.
        for (std::size_t l = 0; l < N; ++l) {
            const Vec d = normalized(curves[l].tangents()[j]);
            for (int k = 1; k <= n; ++k)
                if (room[k - 1] > 0 && fits(d, k)) {
                    mc.region[l][j] = k;
                    --room[k - 1];
                    break;
                }
        }
        for (std::size_t l = 0; l < N; ++l) {
            if (mc.region[l][j] != 0) continue;
            int k = 1;
            while (room[k - 1] == 0) ++k;
            mc.region[l][j] = k;
            --room[k - 1];
        }
        for (std::size_t l = 0; l < N; ++l) {
            const int k = mc.region[l][j];
            const Vec t = curves[l].tangents()[j];
            Vec d = normalized(t);
            if (!fits(d, k)) {
                const Vec u = normalized(region_centroid(momentum.region(k), dim, opt.momentum_extent, opt.margin));
                bool found = false;
                for (double w = opt.blend_step; w <= 1.0 + 1e-12 && !found; w += opt.blend_step) {
                    const Vec cand = (1.0 - w) * d + std::min(w, 1.0) * u;
                    if (norm(cand) < 1e-9) continue;
                    if (fits(normalized(cand), k)) {
                        // One more step inside the cone for margin.
                        const double w2 = std::min(1.0, w + opt.blend_step);
                        const Vec safer = (1.0 - w2) * d + w2 * u;
                        d = norm(safer) > 1e-9 && fits(normalized(safer), k) ? normalized(safer) : normalized(cand);
                        found = true;
                    }
                }
                if (!found) {
                    failed.emplace_back(l, j);
                    continue;
                }
                curves[l].set_tangent(j, d * norm(t));
                ++mc.adjusted;
            }
            mc.direction[l][j] = d;
        }
    }
    if (!failed.empty()) {
        std::ostringstream os;
        os << "no reachable tangent direction for (l, j) =";
        for (auto [l, j] : failed) os << " (" << l << ", " << j << ")";
        throw ConditioningError(os.str());
    }

    // Speeds: centroid radius, clamped into the ray interval and the timing band.
    for (std::size_t l = 0; l < N; ++l) {
        const auto sec = secants(curves[l], opt.times);
        for (std::size_t j = 0; j < K; ++j) {
            const int k = mc.region[l][j];
            const Vec d = mc.direction[l][j];
            const double g = norm(curves[l].tangents()[j]);
            const auto iv = ray_interval(momentum.region(k), d, dim, opt.momentum_extent, opt.margin);
            const double centroid_r = norm(region_centroid(momentum.region(k), dim, opt.momentum_extent, opt.margin));
            const double pad = 0.1 * (iv.hi - iv.lo);
            double rho = std::clamp(centroid_r, iv.lo + pad, iv.hi - pad);
            double c = rho / (opt.mass * g);
            double smin = std::numeric_limits<double>::infinity();
            if (j > 0) smin = std::min(smin, sec[j - 1]);
            if (j + 1 < K) smin = std::min(smin, sec[j]);
            c = std::min(c, opt.timing_factor * smin);
            rho = opt.mass * c * g;
            if (!(c > 0.0) || rho <= iv.lo || rho >= iv.hi) {
                failed.emplace_back(l, j);
                continue;
            }
            mc.speed[l][j] = c;
        }
    }
    if (!failed.empty()) {
        std::ostringstream os;
        os << "speed multiplier cannot meet both the momentum region and the timing band for (l, j) =";
        for (auto [l, j] : failed) os << " (" << l << ", " << j << ")";
        throw ConditioningError(os.str());
    }

    for (std::size_t l = 0; l < N; ++l)
        for (std::size_t j = 0; j < K; ++j)
            if (momentum.label_of(checkpoint_momentum(curves[l], mc, l, j, opt.mass)) != mc.region[l][j])
                throw ConditioningError("momentum recount failed for (" + std::to_string(l) + ", " + std::to_string(j) +
                                        ")");
    try {
        verify_paths(curves, opt.paths);
    } catch (const ConstructionError& e) {
        throw ConditioningError(std::string("conditioned paths fail verification: ") + e.what());
    }
    return mc;
}

Vec checkpoint_momentum(const ScratchCurve& c, const MomentumConditioning& mc, std::size_t l, std::size_t j,
                        double mass) {
    return (mass * mc.speed[l][j]) * c.tangents()[j];
}

nlohmann::json to_json(const MomentumConditioning& mc, int dim) {
    auto dirs = nlohmann::json::array();
    for (const auto& row : mc.direction) {
        auto r = nlohmann::json::array();
        for (const auto& d : row) {
            auto p = nlohmann::json::array();
            for (int a = 0; a < dim; ++a) p.push_back(d[a]);
            r.push_back(p);
        }
        dirs.push_back(r);
    }
    return {{"regions", mc.region}, {"directions", dirs}, {"speeds", mc.speed}, {"adjusted", mc.adjusted}};
}

}  // namespace scratchsim::geometry
