#pragma once

#include <cstdint>
#include <vector>

#include "scratchsim/geometry/curve.hpp"
#include "scratchsim/geometry/waypoints.hpp"

namespace scratchsim::geometry {

enum class PathMode { line, spline };

struct PathOptions {
    PathMode mode = PathMode::spline;
    /// Minimum distance between distinct curves (spline mode).
    double delta_path = 0.0;
    /// Line mode: minimum distance between two particles moving uniformly
    /// along their segments at equal times.
    double min_approach = 0.0;
    /// Largest waypoint perturbation applied to break a near-collision.
    double perturb_max = 0.0;
    int max_perturbations = 50;
    /// Smallest admissible radius of curvature (spline mode).
    double min_curvature_radius = 0.0;
    std::size_t samples_per_curve = 1000;
    std::uint64_t seed = 0;
};

struct PathSet {
    std::vector<ScratchCurve> curves;
    /// The plan actually used; differs from the input if waypoints were perturbed.
    WaypointPlan plan;
    int perturbations = 0;
};

/// Minimum over tau in [0, 1] of |(a0 + tau (a1 - a0)) - (b0 + tau (b1 - b0))|.
double min_approach(const Vec& a0, const Vec& a1, const Vec& b0, const Vec& b1);

/// Distance between segments [p0, p1] and [q0, q1].
double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1);

/// Smallest distance between two curves from dense polylines.
double curve_distance(const ScratchCurve& a, const ScratchCurve& b, std::size_t samples);

/// Smallest distance between polyline pieces of one curve whose arc-length
/// separation is at least `exclusion`.
double self_clearance(const ScratchCurve& c, std::size_t samples, double exclusion);

double min_speed(const ScratchCurve& c, std::size_t samples);
double min_curvature_radius(const ScratchCurve& c, std::size_t samples);

struct PathDiagnostics {
    double min_pair_distance = 0.0;
    double min_self_clearance = 0.0;
    double min_speed = 0.0;
    double min_curvature_radius = 0.0;
};

/// Checks regularity, simplicity, separation and curvature. Throws
/// ConstructionError naming the first violated condition.
PathDiagnostics verify_paths(const std::vector<ScratchCurve>& curves, const PathOptions& options);

/// Line mode needs exactly two checkpoints; spline mode needs D = 3.
PathSet build_paths(const WaypointPlan& plan, const PathOptions& options);

}  // namespace scratchsim::geometry
