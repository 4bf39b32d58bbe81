#pragma once

#include <memory>
#include <vector>

#include "scratchsim/grid/field.hpp"
#include "scratchsim/vec.hpp"

namespace scratchsim::quantum {

/// Smooth external potential U(q, t) with analytic derivatives. Components
/// of q beyond the problem dimension are zero and must stay irrelevant.
class Potential {
public:
    virtual ~Potential() = default;
    virtual double value(const Vec& q, double t) const = 0;
    virtual Vec gradient(const Vec& q, double t) const = 0;
    virtual Mat3 hessian(const Vec& q, double t) const = 0;
    virtual bool time_dependent() const { return false; }
    /// Both at once; overridden where they share work.
    virtual void value_gradient(const Vec& q, double t, double& value, Vec& gradient) const {
        value = this->value(q, t);
        gradient = this->gradient(q, t);
    }
};

/// offset + 1/2 sum_a k_a (q_a - c_a)^2
class HarmonicPotential final : public Potential {
public:
    HarmonicPotential(int dim, Vec stiffness, Vec center, double offset);
    double value(const Vec& q, double t) const override;
    Vec gradient(const Vec& q, double t) const override;
    Mat3 hessian(const Vec& q, double t) const override;

private:
    int dim_;
    Vec k_, c_;
    double offset_;
};

/// Harmonic trap whose centre oscillates along axis 0:
/// c(t) = c + amplitude sin(omega t) e_0.
class DrivenHarmonicPotential final : public Potential {
public:
    DrivenHarmonicPotential(int dim, Vec stiffness, Vec center, double offset, double amplitude, double omega);
    double value(const Vec& q, double t) const override;
    Vec gradient(const Vec& q, double t) const override;
    Mat3 hessian(const Vec& q, double t) const override;
    bool time_dependent() const override { return true; }

private:
    Vec shifted(const Vec& q, double t) const;
    int dim_;
    Vec k_, c_;
    double offset_, amplitude_, omega_;
};

/// offset - depth exp(-|q - c|^2 / (2 width^2)); positive when offset > depth.
class GaussianWellPotential final : public Potential {
public:
    GaussianWellPotential(int dim, double depth, double width, Vec center, double offset);
    double value(const Vec& q, double t) const override;
    Vec gradient(const Vec& q, double t) const override;
    Mat3 hessian(const Vec& q, double t) const override;

private:
    int dim_;
    double depth_, width_;
    Vec c_;
    double offset_;
};

/// a (q_0^2 - b^2)^2 + 1/2 k_perp sum_{a>0} q_a^2 + constant
class DoubleWellPotential final : public Potential {
public:
    DoubleWellPotential(int dim, double a, double b, double k_perp, double constant);
    double value(const Vec& q, double t) const override;
    Vec gradient(const Vec& q, double t) const override;
    Mat3 hessian(const Vec& q, double t) const override;

private:
    int dim_;
    double a_, b_, k_perp_, constant_;
};

/// Multilinear interpolation of a sampled field; derivatives by central
/// differences of the interpolant. Points outside the sampled box are
/// clamped onto it.
class TabulatedPotential final : public Potential {
public:
    explicit TabulatedPotential(grid::ScalarField field);
    double value(const Vec& q, double t) const override;
    Vec gradient(const Vec& q, double t) const override;
    Mat3 hessian(const Vec& q, double t) const override;
    const grid::ScalarField& field() const noexcept { return field_; }

private:
    grid::ScalarField field_;
};

/// U sampled at every grid point at time t.
grid::ScalarField sample(const Potential& potential, const grid::SpatialGrid& grid, double t = 0.0);

}  // namespace scratchsim::quantum
