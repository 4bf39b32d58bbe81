#include "scratchsim/geometry/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scratchsim/error.hpp"
#include "scratchsim/random.hpp"

namespace scratchsim::geometry {

double min_approach(const Vec& a0, const Vec& a1, const Vec& b0, const Vec& b1) {
    const Vec d0 = a0 - b0;
    const Vec dd = (a1 - b1) - d0;
    const double den = norm2(dd);
    double tau = den > 0.0 ? -dot(d0, dd) / den : 0.0;
    tau = std::clamp(tau, 0.0, 1.0);
    return norm(d0 + tau * dd);
}

double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1) {
    const Vec d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    const double a = norm2(d1), e = norm2(d2), f = dot(d2, r);
    double s = 0.0, t = 0.0;
    if (a == 0.0 && e == 0.0) return norm(r);
    if (a == 0.0) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e == 0.0) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double den = a * e - b * b;
            s = den > 0.0 ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return norm((p0 + s * d1) - (q0 + t * d2));
}

namespace {

struct Chunk {
    std::size_t first, last;  // segment range [first, last)
    Vec center;
    double radius;
};

constexpr std::size_t kChunk = 16;

std::vector<Chunk> chunks(const std::vector<Vec>& pts) {
    std::vector<Chunk> out;
    const std::size_t segs = pts.size() - 1;
    for (std::size_t a = 0; a < segs; a += kChunk) {
        const std::size_t b = std::min(segs, a + kChunk);
        Vec lo = pts[a], hi = pts[a];
        for (std::size_t i = a; i <= b; ++i)
            for (int k = 0; k < 3; ++k) {
                lo[k] = std::min(lo[k], pts[i][k]);
                hi[k] = std::max(hi[k], pts[i][k]);
            }
        const Vec c = 0.5 * (lo + hi);
        out.push_back({a, b, c, 0.5 * norm(hi - lo)});
    }
    return out;
}

}  // namespace

double curve_distance(const ScratchCurve& a, const ScratchCurve& b, std::size_t samples) {
    const auto pa = a.sample(samples), pb = b.sample(samples);
    const auto ca = chunks(pa), cb = chunks(pb);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : ca)
        for (const auto& y : cb) {
            if (norm(x.center - y.center) - x.radius - y.radius >= best) continue;
            for (std::size_t i = x.first; i < x.last; ++i)
                for (std::size_t j = y.first; j < y.last; ++j)
                    best = std::min(best, segment_distance(pa[i], pa[i + 1], pb[j], pb[j + 1]));
        }
    return best;
}

double self_clearance(const ScratchCurve& c, std::size_t samples, double exclusion) {
    const auto p = c.sample(samples);
    std::vector<double> arc(p.size(), 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) arc[i] = arc[i - 1] + norm(p[i] - p[i - 1]);
    const auto ch = chunks(p);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < ch.size(); ++u)
        for (std::size_t v = u; v < ch.size(); ++v) {
            const auto& x = ch[u];
            const auto& y = ch[v];
            // Chunks whose arc ranges are all within the exclusion are skipped.
            if (arc[y.last] - arc[x.first] < exclusion) continue;
            if (norm(x.center - y.center) - x.radius - y.radius >= best) continue;
            for (std::size_t i = x.first; i < x.last; ++i)
                for (std::size_t j = std::max(y.first, i + 1); j < y.last; ++j) {
                    // Arc separation between the nearest ends of the two pieces.
                    if (arc[j] - arc[i + 1] < exclusion) continue;
                    best = std::min(best, segment_distance(p[i], p[i + 1], p[j], p[j + 1]));
                }
        }
    return best;
}

double min_speed(const ScratchCurve& c, std::size_t samples) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
        best = std::min(best, norm(c.derivative(s)));
    }
    // Both one-sided derivatives at interior knots.
    for (std::size_t j = 1; j + 1 < c.knot_count(); ++j)
        best = std::min(best, norm(c.derivative_in(j - 1, c.knots()[j])));
    return best;
}

double min_curvature_radius(const ScratchCurve& c, std::size_t samples) {
    if (c.is_line()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
        const Vec d1 = c.derivative(s), d2 = c.second_derivative(s);
        const double sp = norm(d1);
        const double k = norm(cross(d1, d2)) / (sp * sp * sp);
        if (k > 0.0) best = std::min(best, 1.0 / k);
    }
    return best;
}

PathDiagnostics verify_paths(const std::vector<ScratchCurve>& curves, const PathOptions& opt) {
    PathDiagnostics d;
    d.min_pair_distance = std::numeric_limits<double>::infinity();
    d.min_self_clearance = std::numeric_limits<double>::infinity();
    d.min_speed = std::numeric_limits<double>::infinity();
    d.min_curvature_radius = std::numeric_limits<double>::infinity();
    const std::size_t ns = opt.samples_per_curve;
    for (std::size_t l = 0; l < curves.size(); ++l) {
        const auto& c = curves[l];
        const double sp = min_speed(c, ns);
        d.min_speed = std::min(d.min_speed, sp);
        if (!(sp > 0.0)) throw ConstructionError("curve " + std::to_string(l) + " is not regular");
        if (!c.is_line()) {
            const double sc = self_clearance(c, ns, std::max(opt.delta_path, 1e-9) * 2.0);
            d.min_self_clearance = std::min(d.min_self_clearance, sc);
            if (!(sc >= opt.delta_path) || sc == 0.0)
                throw ConstructionError("curve " + std::to_string(l) + " comes within " + std::to_string(sc) +
                                        " of itself");
            const double rc = min_curvature_radius(c, ns);
            d.min_curvature_radius = std::min(d.min_curvature_radius, rc);
            if (rc <= opt.min_curvature_radius)
                throw ConstructionError("curve " + std::to_string(l) + " has curvature radius " + std::to_string(rc) +
                                        " below the tube radius");
        }
    }
    if (opt.mode == PathMode::spline)
        for (std::size_t a = 0; a < curves.size(); ++a)
            for (std::size_t b = a + 1; b < curves.size(); ++b) {
                const double dist = curve_distance(curves[a], curves[b], ns);
                d.min_pair_distance = std::min(d.min_pair_distance, dist);
                if (!(dist >= opt.delta_path) || dist == 0.0)
                    throw ConstructionError("curves " + std::to_string(a) + " and " + std::to_string(b) +
                                            " come within " + std::to_string(dist));
            }
    return d;
}

namespace {

bool general_position_ok(const WaypointPlan& plan) {
    if (!plan.options.general_position) return true;
    std::vector<Vec> pts;
    for (const auto& row : plan.points) pts.insert(pts.end(), row.begin(), row.end());
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            if (norm(pts[a] - pts[b]) < plan.options.min_separation) return false;
            for (std::size_t c = b + 1; c < pts.size(); ++c)
                if (triangle_height(pts[a], pts[b], pts[c]) < plan.options.eps_coll) return false;
        }
    return true;
}

/// First pair (j, l) whose uniform motions come within the threshold.
bool find_collision(const WaypointPlan& plan, double threshold, int& j_out) {
    const int N = static_cast<int>(plan.points.size());
    for (int j = 0; j < N; ++j)
        for (int l = j + 1; l < N; ++l)
            if (min_approach(plan.points[j].front(), plan.points[j].back(), plan.points[l].front(),
                             plan.points[l].back()) <= threshold) {
                j_out = j;
                return true;
            }
    return false;
}

}  // namespace

PathSet build_paths(const WaypointPlan& plan_in, const PathOptions& opt) {
    const int dim = plan_in.dim;
    if (plan_in.points.empty()) throw DomainError("no waypoints");
    PathSet out;
    out.plan = plan_in;
    auto& plan = out.plan;

    if (opt.mode == PathMode::line) {
        if (plan.assignment.checkpoints != 2) throw DomainError("line paths need exactly two checkpoints");
        Rng rng(opt.seed);
        int j = -1;
        while (find_collision(plan, opt.min_approach, j)) {
            if (out.perturbations >= opt.max_perturbations)
                throw ConstructionError("particles " + std::to_string(j) +
                                        " and another still collide after the perturbation budget");
            // Perturb the first coordinate of the particle's initial waypoint.
            const Vec saved = plan.points[j].front();
            for (int tries = 0; tries < 100; ++tries) {
                plan.points[j].front()[0] = saved[0] + uniform(rng, -opt.perturb_max, opt.perturb_max);
                if (general_position_ok(plan)) break;
                plan.points[j].front() = saved;
            }
            ++out.perturbations;
        }
        for (const auto& row : plan.points) out.curves.push_back(ScratchCurve::line(dim, row.front(), row.back()));
    } else {
        if (dim < 3) throw DomainError("spline paths need D >= 3");
        for (const auto& row : plan.points) out.curves.push_back(ScratchCurve::clamped_spline(dim, row));
    }
    verify_paths(out.curves, opt);
    return out;
}

}  // namespace scratchsim::geometry
