#include "scratchsim/quantum/potential.hpp"

#include <algorithm>
#include <cmath>

namespace scratchsim::quantum {

HarmonicPotential::HarmonicPotential(int dim, Vec stiffness, Vec center, double offset)
    : dim_(dim), k_(stiffness), c_(center), offset_(offset) {
    for (int a = dim_; a < 3; ++a) k_[a] = c_[a] = 0.0;
}

double HarmonicPotential::value(const Vec& q, double) const {
    double u = offset_;
    for (int a = 0; a < dim_; ++a) u += 0.5 * k_[a] * (q[a] - c_[a]) * (q[a] - c_[a]);
    return u;
}

Vec HarmonicPotential::gradient(const Vec& q, double) const {
    Vec g;
    for (int a = 0; a < dim_; ++a) g[a] = k_[a] * (q[a] - c_[a]);
    return g;
}

Mat3 HarmonicPotential::hessian(const Vec&, double) const {
    Mat3 h;
    for (int a = 0; a < dim_; ++a) h(a, a) = k_[a];
    return h;
}

DrivenHarmonicPotential::DrivenHarmonicPotential(int dim, Vec stiffness, Vec center, double offset,
                                                 double amplitude, double omega)
    : dim_(dim), k_(stiffness), c_(center), offset_(offset), amplitude_(amplitude), omega_(omega) {
    for (int a = dim_; a < 3; ++a) k_[a] = c_[a] = 0.0;
}

Vec DrivenHarmonicPotential::shifted(const Vec& q, double t) const {
    Vec d = q - c_;
    d[0] -= amplitude_ * std::sin(omega_ * t);
    for (int a = dim_; a < 3; ++a) d[a] = 0.0;
    return d;
}

double DrivenHarmonicPotential::value(const Vec& q, double t) const {
    const Vec d = shifted(q, t);
    double u = offset_;
    for (int a = 0; a < dim_; ++a) u += 0.5 * k_[a] * d[a] * d[a];
    return u;
}

Vec DrivenHarmonicPotential::gradient(const Vec& q, double t) const {
    const Vec d = shifted(q, t);
    Vec g;
    for (int a = 0; a < dim_; ++a) g[a] = k_[a] * d[a];
    return g;
}

Mat3 DrivenHarmonicPotential::hessian(const Vec&, double) const {
    Mat3 h;
    for (int a = 0; a < dim_; ++a) h(a, a) = k_[a];
    return h;
}

GaussianWellPotential::GaussianWellPotential(int dim, double depth, double width, Vec center, double offset)
    : dim_(dim), depth_(depth), width_(width), c_(center), offset_(offset) {
    for (int a = dim_; a < 3; ++a) c_[a] = 0.0;
}

double GaussianWellPotential::value(const Vec& q, double) const {
    Vec d = q - c_;
    return offset_ - depth_ * std::exp(-norm2(d) / (2.0 * width_ * width_));
}

Vec GaussianWellPotential::gradient(const Vec& q, double) const {
    const Vec d = q - c_;
    const double w2 = width_ * width_;
    const double e = depth_ * std::exp(-norm2(d) / (2.0 * w2));
    return d * (e / w2);
}

Mat3 GaussianWellPotential::hessian(const Vec& q, double) const {
    const Vec d = q - c_;
    const double w2 = width_ * width_;
    const double e = depth_ * std::exp(-norm2(d) / (2.0 * w2));
    Mat3 h = Mat3::identity(dim_) * (e / w2);
    h += Mat3::outer(d, d) * (-e / (w2 * w2));
    return h;
}

DoubleWellPotential::DoubleWellPotential(int dim, double a, double b, double k_perp, double constant)
    : dim_(dim), a_(a), b_(b), k_perp_(k_perp), constant_(constant) {}

double DoubleWellPotential::value(const Vec& q, double) const {
    const double s = q[0] * q[0] - b_ * b_;
    double u = a_ * s * s + constant_;
    for (int i = 1; i < dim_; ++i) u += 0.5 * k_perp_ * q[i] * q[i];
    return u;
}

Vec DoubleWellPotential::gradient(const Vec& q, double) const {
    Vec g;
    g[0] = 4.0 * a_ * q[0] * (q[0] * q[0] - b_ * b_);
    for (int i = 1; i < dim_; ++i) g[i] = k_perp_ * q[i];
    return g;
}

Mat3 DoubleWellPotential::hessian(const Vec& q, double) const {
    Mat3 h;
    h(0, 0) = 4.0 * a_ * (3.0 * q[0] * q[0] - b_ * b_);
    for (int i = 1; i < dim_; ++i) h(i, i) = k_perp_;
    return h;
}

TabulatedPotential::TabulatedPotential(grid::ScalarField field) : field_(std::move(field)) {}

double TabulatedPotential::value(const Vec& q, double) const {
    const auto& g = field_.grid();
    const int d = g.dim();
    std::array<std::size_t, 3> i0{0, 0, 0};
    std::array<double, 3> w{0, 0, 0};
    for (int a = 0; a < d; ++a) {
        const double h = g.spacing(a);
        const double x = (q[a] - g.lo(a)) / h - 0.5;
        const double xc = std::clamp(x, 0.0, double(g.extent(a) - 1));
        const auto base = std::min(static_cast<std::size_t>(xc), g.extent(a) - 2);
        i0[a] = base;
        w[a] = xc - double(base);
    }
    double u = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        auto idx = i0;
        double weight = 1.0;
        for (int a = 0; a < d; ++a) {
            const bool up = (corner >> a) & 1;
            idx[a] += up;
            weight *= up ? w[a] : 1.0 - w[a];
        }
        if (weight != 0.0) u += weight * field_[g.flatten(idx)];
    }
    return u;
}

Vec TabulatedPotential::gradient(const Vec& q, double t) const {
    const auto& g = field_.grid();
    const double eps = 1e-4 * g.min_spacing();
    Vec grad;
    for (int a = 0; a < g.dim(); ++a) {
        Vec qp = q, qm = q;
        qp[a] += eps;
        qm[a] -= eps;
        grad[a] = (value(qp, t) - value(qm, t)) / (2.0 * eps);
    }
    return grad;
}

Mat3 TabulatedPotential::hessian(const Vec& q, double t) const {
    const auto& g = field_.grid();
    const double eps = 1e-3 * g.min_spacing();
    Mat3 h;
    for (int a = 0; a < g.dim(); ++a) {
        Vec qp = q, qm = q;
        qp[a] += eps;
        qm[a] -= eps;
        const Vec gp = gradient(qp, t), gm = gradient(qm, t);
        for (int b = 0; b < g.dim(); ++b) h(a, b) = (gp[b] - gm[b]) / (2.0 * eps);
    }
    for (int a = 0; a < g.dim(); ++a)
        for (int b = a + 1; b < g.dim(); ++b) h(a, b) = h(b, a) = 0.5 * (h(a, b) + h(b, a));
    return h;
}

grid::ScalarField sample(const Potential& potential, const grid::SpatialGrid& grid, double t) {
    grid::ScalarField f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = potential.value(grid.point(i), t);
    return f;
}

}  // namespace scratchsim::quantum
