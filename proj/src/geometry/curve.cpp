#include "scratchsim/geometry/curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "scratchsim/error.hpp"

namespace scratchsim::geometry {

namespace {

// 5-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 5> kGaussX{0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155,
                                        0.95308992296933200};
constexpr std::array<double, 5> kGaussW{0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                        0.23931433524968324, 0.11846344252809454};

bool finite(const Vec& v) { return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]); }

}  // namespace

ScratchCurve ScratchCurve::line(int dim, const Vec& a, const Vec& b) {
    return hermite(dim, {0.0, 1.0}, {a, b}, {b - a, b - a}, true);
}

ScratchCurve ScratchCurve::hermite(int dim, std::vector<double> knots, std::vector<Vec> points,
                                   std::vector<Vec> tangents, bool is_line) {
    if (dim != 2 && dim != 3) throw DomainError("curve dimension must be 2 or 3");
    if (knots.size() < 2 || points.size() != knots.size() || tangents.size() != knots.size())
        throw DomainError("a curve needs at least two knots with matching points and tangents");
    if (knots.front() != 0.0 || knots.back() != 1.0) throw DomainError("curve knots must span [0, 1]");
    for (std::size_t j = 1; j < knots.size(); ++j)
        if (!(knots[j] > knots[j - 1])) throw DomainError("curve knots must be strictly increasing");
    for (std::size_t j = 0; j < knots.size(); ++j) {
        if (!finite(points[j]) || !finite(tangents[j])) throw DomainError("curve data must be finite");
        if (dim == 2 && (points[j][2] != 0.0 || tangents[j][2] != 0.0))
            throw DomainError("2-D curve has a non-zero third component");
    }
    ScratchCurve c;
    c.dim_ = dim;
    c.is_line_ = is_line;
    c.knots_ = std::move(knots);
    c.points_ = std::move(points);
    c.tangents_ = std::move(tangents);
    c.rebuild();
    return c;
}

ScratchCurve ScratchCurve::clamped_spline(int dim, const std::vector<Vec>& points, const Vec& t0, const Vec& t1) {
    const std::size_t K = points.size();
    if (K < 2) throw DomainError("a spline needs at least two points");
    std::vector<double> knots(K, 0.0);
    for (std::size_t j = 1; j < K; ++j) {
        const double d = norm(points[j] - points[j - 1]);
        if (!(d > 0.0)) throw DomainError("consecutive spline points coincide");
        knots[j] = knots[j - 1] + d;
    }
    const double total = knots.back();
    for (auto& k : knots) k /= total;
    knots.back() = 1.0;

    std::vector<Vec> m(K);
    m.front() = t0;
    m.back() = t1;
    if (K > 2) {
        // Tridiagonal C2 system for interior tangents (Thomas algorithm).
        const std::size_t n = K - 2;
        std::vector<double> a(n), b(n), c(n);
        std::vector<Vec> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + 1;
            const double hl = knots[j] - knots[j - 1], hr = knots[j + 1] - knots[j];
            a[i] = 1.0 / hl;
            b[i] = 2.0 * (1.0 / hl + 1.0 / hr);
            c[i] = 1.0 / hr;
            r[i] = 3.0 * ((points[j] - points[j - 1]) * (1.0 / (hl * hl)) + (points[j + 1] - points[j]) * (1.0 / (hr * hr)));
        }
        r.front() -= a.front() * t0;
        r.back() -= c.back() * t1;
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        m[n] = r[n - 1] * (1.0 / b[n - 1]);
        for (std::size_t i = n - 1; i-- > 0;) m[i + 1] = (r[i] - c[i] * m[i + 2]) * (1.0 / b[i]);
    }
    return hermite(dim, std::move(knots), points, std::move(m));
}

ScratchCurve ScratchCurve::clamped_spline(int dim, const std::vector<Vec>& points) {
    if (points.size() < 2) throw DomainError("a spline needs at least two points");
    // With chord-length knots on [0, 1] the chord slope is direction * total length.
    double total = 0.0;
    for (std::size_t j = 1; j < points.size(); ++j) total += norm(points[j] - points[j - 1]);
    const Vec t0 = normalized(points[1] - points[0]) * total;
    const Vec t1 = normalized(points.back() - points[points.size() - 2]) * total;
    return clamped_spline(dim, points, t0, t1);
}

std::size_t ScratchCurve::segment(double s) const {
    if (s <= knots_.front()) return 0;
    if (s >= knots_.back()) return knots_.size() - 2;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

Vec ScratchCurve::point(double s) const {
    const std::size_t j = segment(s);
    const double d = knots_[j + 1] - knots_[j];
    const double u = (s - knots_[j]) / d;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * points_[j] + (h10 * d) * tangents_[j] + h01 * points_[j + 1] + (h11 * d) * tangents_[j + 1];
}

Vec ScratchCurve::derivative_in(std::size_t j, double s) const {
    const double d = knots_[j + 1] - knots_[j];
    const double u = (s - knots_[j]) / d;
    const double u2 = u * u;
    const double g00 = 6 * u2 - 6 * u, g10 = 3 * u2 - 4 * u + 1, g01 = -6 * u2 + 6 * u, g11 = 3 * u2 - 2 * u;
    return (g00 / d) * points_[j] + g10 * tangents_[j] + (g01 / d) * points_[j + 1] + g11 * tangents_[j + 1];
}

Vec ScratchCurve::second_derivative_in(std::size_t j, double s) const {
    const double d = knots_[j + 1] - knots_[j];
    const double u = (s - knots_[j]) / d;
    const double k00 = 12 * u - 6, k10 = 6 * u - 4, k01 = -12 * u + 6, k11 = 6 * u - 2;
    return (k00 / (d * d)) * points_[j] + (k10 / d) * tangents_[j] + (k01 / (d * d)) * points_[j + 1] +
           (k11 / d) * tangents_[j + 1];
}

Vec ScratchCurve::derivative(double s) const { return derivative_in(segment(s), s); }
Vec ScratchCurve::second_derivative(double s) const { return second_derivative_in(segment(s), s); }

void ScratchCurve::set_tangent(std::size_t j, const Vec& t) {
    if (j >= tangents_.size()) throw DomainError("knot index out of range");
    if (!finite(t)) throw DomainError("tangent must be finite");
    tangents_[j] = t;
    if (dim_ == 2) tangents_[j][2] = 0.0;
    is_line_ = false;
    rebuild();
}

void ScratchCurve::rebuild() {
    arc_.assign(knots_.size(), 0.0);
    for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
        const double a = knots_[j], d = knots_[j + 1] - a;
        // Split each segment so the quadrature stays accurate for sharp turns.
        constexpr int kSub = 32;
        double len = 0.0;
        for (int k = 0; k < kSub; ++k)
            for (std::size_t g = 0; g < kGaussX.size(); ++g) {
                const double s = a + d * (k + kGaussX[g]) / kSub;
                len += kGaussW[g] * norm(derivative_in(j, s)) * d / kSub;
            }
        arc_[j + 1] = arc_[j] + len;
    }
    length_ = arc_.back();
}

double ScratchCurve::arc_length(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    const std::size_t j = segment(s);
    const double a = knots_[j];
    if (s == a) return arc_[j];
    double len = 0.0;
    constexpr int kSub = 32;
    const double d = s - a;
    for (int k = 0; k < kSub; ++k)
        for (std::size_t g = 0; g < kGaussX.size(); ++g)
            len += kGaussW[g] * norm(derivative_in(j, a + d * (k + kGaussX[g]) / kSub)) * d / kSub;
    return arc_[j] + len;
}

std::vector<Vec> ScratchCurve::sample(std::size_t n) const {
    if (n < 2) throw DomainError("curve sampling needs at least two points");
    std::vector<Vec> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = point(static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

void ScratchCurve::bounds(Vec& lo, Vec& hi) const {
    lo = hi = points_.front();
    for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
        const double d = knots_[j + 1] - knots_[j];
        const Vec ctrl[4] = {points_[j], points_[j] + tangents_[j] * (d / 3.0), points_[j + 1] - tangents_[j + 1] * (d / 3.0),
                             points_[j + 1]};
        for (const auto& p : ctrl)
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], p[a]);
                hi[a] = std::max(hi[a], p[a]);
            }
    }
}

nlohmann::json to_json(const ScratchCurve& c) {
    auto vecs = [&](const std::vector<Vec>& v) {
        auto a = nlohmann::json::array();
        for (const auto& x : v) {
            auto p = nlohmann::json::array();
            for (int i = 0; i < c.dim(); ++i) p.push_back(x[i]);
            a.push_back(p);
        }
        return a;
    };
    return {{"dim", c.dim()},
            {"kind", c.is_line() ? "line" : "hermite"},
            {"knots", c.knots()},
            {"points", vecs(c.points())},
            {"tangents", vecs(c.tangents())}};
}

ScratchCurve curve_from_json(const nlohmann::json& j) {
    try {
        const int dim = j.at("dim").get<int>();
        auto vecs = [&](const nlohmann::json& a) {
            std::vector<Vec> out;
            for (const auto& p : a) {
                if (static_cast<int>(p.size()) != dim) throw DomainError("curve vector has the wrong dimension");
                Vec v;
                for (int i = 0; i < dim; ++i) v[i] = p[i].get<double>();
                out.push_back(v);
            }
            return out;
        };
        return ScratchCurve::hermite(dim, j.at("knots").get<std::vector<double>>(), vecs(j.at("points")),
                                     vecs(j.at("tangents")), j.value("kind", "hermite") == "line");
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed curve: ") + e.what());
    }
}

}  // namespace scratchsim::geometry
