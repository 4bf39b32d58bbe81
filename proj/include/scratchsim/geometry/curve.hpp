#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "scratchsim/vec.hpp"

namespace scratchsim::geometry {

/// Piecewise cubic Hermite curve q(s), s in [0, 1]. Knots are the checkpoint
/// parameters s_j; points and tangents (dq/ds) are given at the knots.
class ScratchCurve {
public:
    ScratchCurve() = default;

    /// Straight segment a -> b with s proportional to arc length.
    static ScratchCurve line(int dim, const Vec& a, const Vec& b);
    static ScratchCurve hermite(int dim, std::vector<double> knots, std::vector<Vec> points, std::vector<Vec> tangents,
                                bool is_line = false);
    /// C2 cubic spline through `points` at chord-length knots with the given
    /// end tangents.
    static ScratchCurve clamped_spline(int dim, const std::vector<Vec>& points, const Vec& start_tangent,
                                       const Vec& end_tangent);
    /// End tangents taken from the first and last chords.
    static ScratchCurve clamped_spline(int dim, const std::vector<Vec>& points);

    int dim() const noexcept { return dim_; }
    bool is_line() const noexcept { return is_line_; }
    std::size_t knot_count() const noexcept { return knots_.size(); }
    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<Vec>& points() const noexcept { return points_; }
    const std::vector<Vec>& tangents() const noexcept { return tangents_; }

    /// Index of the segment containing s (right-continuous, last segment at s = 1).
    std::size_t segment(double s) const;
    Vec point(double s) const;
    Vec derivative(double s) const;
    Vec second_derivative(double s) const;
    /// One-sided values at a knot: from the segment on the given side.
    Vec derivative_in(std::size_t seg, double s) const;
    Vec second_derivative_in(std::size_t seg, double s) const;

    /// Replaces the tangent at knot j. Only the two adjacent segments change,
    /// so the curve stays C1.
    void set_tangent(std::size_t j, const Vec& t);

    double length() const noexcept { return length_; }
    /// Arc length from 0 to s.
    double arc_length(double s) const;
    std::vector<Vec> sample(std::size_t n) const;
    /// Axis-aligned bounds of the whole curve (the convex hull of the Bezier
    /// control points, so conservative).
    void bounds(Vec& lo, Vec& hi) const;

private:
    void rebuild();

    int dim_ = 0;
    bool is_line_ = false;
    std::vector<double> knots_;
    std::vector<Vec> points_;
    std::vector<Vec> tangents_;
    std::vector<double> arc_;
    double length_ = 0.0;
};

nlohmann::json to_json(const ScratchCurve& c);
ScratchCurve curve_from_json(const nlohmann::json& j);

}  // namespace scratchsim::geometry
