#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scratchsim/geometry/conditioning.hpp"
#include "scratchsim/geometry/curve.hpp"
#include "scratchsim/grid/partition.hpp"
#include "scratchsim/quantum/potential.hpp"
#include "scratchsim/vec.hpp"

namespace scratchsim::classical {

struct ParticleState {
    Vec q;
    Vec p;
    std::size_t id = 0;
};

/// Independent point particles of equal mass.
struct ClassicalEnsemble {
    int dim = 0;
    double mass = 1.0;
    std::vector<ParticleState> particles;

    std::size_t size() const noexcept { return particles.size(); }
};

/// Particle l at the start of line l with p = m (q_f - q_i) / (t_f - t_i).
ClassicalEnsemble initialize_lines(const std::vector<geometry::ScratchCurve>& lines, double mass, double t_i,
                                   double t_f);

/// Particle l at c_l(s_1) with p = m c_{l,1} dq/ds(s_1).
ClassicalEnsemble initialize_on_scratches(const std::vector<geometry::ScratchCurve>& curves,
                                          const geometry::MomentumConditioning& conditioning, double mass);

/// Largest step resolving the transverse oscillation of a scratch:
/// (1/20) 2 pi / sqrt(2 lambda U_max / m).
double stiffness_step(double lambda, double u_max, double mass);

struct IntegrationOptions {
    /// Upper bound on the step; intervals between checkpoints are split into
    /// equal steps no longer than this.
    double max_step = 1e-3;
    /// |E(t) - E(0)| / max(|E(0)|, K(0)) allowed for static potentials; <= 0 disables.
    double energy_tolerance = 1e-6;
    /// Smallest allowed distance between two particles; <= 0 disables.
    double min_pair_distance = 0.0;
    /// Particles must stay inside [lo, hi] on the first dim axes when set.
    bool confine = false;
    Vec box_lo, box_hi;
    /// Record every n-th step into the trajectory; 0 records checkpoints only.
    std::size_t record_every = 0;
    /// Reported in error messages.
    double lambda = 0.0;
};

struct TrajectoryRow {
    double t = 0.0;
    std::size_t l = 0;
    Vec q, p;
    double energy = 0.0;
};

struct IntegrationResult {
    /// Ensemble state at each checkpoint time.
    std::vector<std::vector<ParticleState>> snapshots;
    std::vector<TrajectoryRow> trajectory;
    std::vector<double> initial_energy;
    double max_energy_drift = 0.0;
    /// Per particle, max over steps of the distance to its own curve (when
    /// curves are supplied).
    std::vector<double> max_deviation;
    /// Smallest inter-particle distance seen over all steps.
    double min_pair_distance = 0.0;
    std::size_t steps = 0;
    double step = 0.0;
};

/// Velocity Verlet from times.front() with snapshots at every entry of
/// `times`. Throws StabilityError on energy drift, ConfinementError when a
/// particle leaves the box or two particles come closer than allowed.
IntegrationResult integrate(const ClassicalEnsemble& ensemble, const quantum::Potential& potential,
                            const std::vector<double>& times, const IntegrationOptions& options = {},
                            const std::vector<geometry::ScratchCurve>* curves = nullptr);

struct OccupancyRecord {
    /// counts[j][k] for checkpoint j and zero-based region k.
    std::vector<std::vector<int>> counts;
    std::vector<std::vector<int>> counts_tilde;
    std::vector<std::vector<double>> pi;
    std::vector<std::vector<double>> pi_tilde;
    bool has_momentum = false;
};

/// Region counts of positions (and momenta when a partition is given).
/// Particles outside every region are an error.
OccupancyRecord occupancy(const std::vector<std::vector<ParticleState>>& snapshots,
                          const grid::RegionPartition& position, const grid::RegionPartition* momentum = nullptr);

/// `t,l,q1..qD,p1..pD,E`
std::string trajectory_csv(const std::vector<TrajectoryRow>& rows, int dim);
/// `t_j,k,pi_k,pi_tilde_k,count,count_tilde`, k 1-based.
std::string occupancy_csv(const OccupancyRecord& record, const std::vector<double>& times);

/// Smallest pairwise distance among points, by sweep and prune along axis 0.
double min_pairwise_distance(const std::vector<Vec>& points);

}  // namespace scratchsim::classical
