#include "scratchsim/experiment/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "scratchsim/diophantine/approximation.hpp"
#include "scratchsim/error.hpp"
#include "scratchsim/geometry/conditioning.hpp"
#include "scratchsim/geometry/itinerary.hpp"
#include "scratchsim/geometry/paths.hpp"
#include "scratchsim/geometry/waypoints.hpp"
#include "scratchsim/grid/fourier.hpp"
#include "scratchsim/scratch/scratched.hpp"
#include "scratchsim/scratch/tangential.hpp"

namespace scratchsim::experiment {

using nlohmann::json;

namespace {

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e.what());
    }
}

std::string long_text(long double x) {
    std::ostringstream os;
    os << std::setprecision(21) << x;
    return os.str();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t attempt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (attempt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct QuantumStage {
    std::vector<std::vector<double>> raw_P, raw_P_tilde;
    std::vector<double> gap_P, gap_P_tilde;
    std::vector<std::vector<double>> P, P_tilde;
    quantum::PropagationResult result;
    double momentum_extent = 0.0;
};

QuantumStage run_quantum(const ExperimentConfig& cfg, const quantum::QuantumSystem& system,
                         const quantum::Wavefunction& psi0, bool with_momentum) {
    QuantumStage q;
    quantum::PropagationOptions popt;
    popt.max_step = cfg.propagation_step;
    popt.norm_tolerance = cfg.tolerances.norm;
    popt.edge_eps = cfg.tolerances.edge_eps;
    q.result = quantum::propagate(system, psi0, cfg.checkpoints(), popt);
    const auto positions = cfg.positions();
    for (const auto& snap : q.result.snapshots) {
        q.raw_P.push_back(quantum::occupation_probabilities(snap, positions, cfg.hbar));
        if (with_momentum) {
            q.raw_P_tilde.push_back(quantum::occupation_probabilities(snap, cfg.momenta(), cfg.hbar));
            // Momentum box: mean plus three standard deviations on every axis.
            const auto rho = grid::momentum_density(snap.psi, cfg.hbar);
            const auto& mg = rho.grid();
            const double dv = mg.cell_volume();
            for (int a = 0; a < mg.dim(); ++a) {
                double m0 = 0.0, m1 = 0.0, m2 = 0.0;
                for (std::size_t i = 0; i < rho.size(); ++i) {
                    const double p = mg.point(i)[a];
                    m0 += rho[i] * dv;
                    m1 += rho[i] * dv * p;
                    m2 += rho[i] * dv * p * p;
                }
                const double mean = m1 / m0;
                const double sd = std::sqrt(std::max(0.0, m2 / m0 - mean * mean));
                q.momentum_extent = std::max(q.momentum_extent, std::fabs(mean) + 3.0 * sd);
            }
        }
    }
    q.P = renormalize(q.raw_P, q.gap_P);
    if (with_momentum) q.P_tilde = renormalize(q.raw_P_tilde, q.gap_P_tilde);
    if (cfg.momentum_extent > 0.0) q.momentum_extent = cfg.momentum_extent;
    return q;
}

diophantine::ApproximationProblem make_problem(const std::vector<std::vector<double>>& P,
                                               const std::vector<std::vector<double>>& P_tilde, std::uint64_t Q) {
    diophantine::ApproximationProblem prob;
    for (const auto& row : P) prob.groups.push_back(row);
    for (const auto& row : P_tilde) prob.groups.push_back(row);
    prob.constraints.assign(prob.groups.size(), diophantine::Rational{1, 1});
    prob.Q = Q;
    return prob;
}

json table_json(const std::vector<std::vector<double>>& t) { return t; }

std::string probabilities_csv(const std::vector<double>& times, const std::vector<std::vector<double>>& raw,
                              const std::vector<std::vector<double>>& P,
                              const std::vector<std::vector<double>>& raw_tilde,
                              const std::vector<std::vector<double>>& P_tilde) {
    std::ostringstream os;
    os << std::setprecision(17) << "t_j,k,P_raw,P,P_tilde_raw,P_tilde\n";
    for (std::size_t j = 0; j < P.size(); ++j)
        for (std::size_t k = 0; k < P[j].size(); ++k) {
            os << times[j] << ',' << k + 1 << ',' << raw[j][k] << ',' << P[j][k] << ',';
            if (P_tilde.empty()) os << ",\n";
            else os << raw_tilde[j][k] << ',' << P_tilde[j][k] << '\n';
        }
    return os.str();
}

double grid_max(const quantum::Potential& U, const grid::SpatialGrid& g, const std::vector<double>& times) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : times) {
        const auto f = quantum::sample(U, g, t);
        for (double v : f.values()) m = std::max(m, v);
    }
    return m;
}

/// Velocity Verlet at the stiffness step, halved on a stability error.
ClassicalRun run_classical(const ExperimentConfig& cfg, const classical::ClassicalEnsemble& ensemble,
                           const quantum::Potential& potential, const std::vector<geometry::ScratchCurve>& curves,
                           double lambda, double u_max, double min_pair, const grid::SpatialGrid& g,
                           std::string& trajectory) {
    ClassicalRun run;
    run.lambda = lambda;
    classical::IntegrationOptions opt;
    opt.max_step = classical::stiffness_step(lambda, u_max, cfg.mass) / cfg.dt_divisor;
    opt.energy_tolerance = cfg.tolerances.energy;
    opt.min_pair_distance = min_pair;
    opt.confine = true;
    opt.box_lo = g.lower();
    opt.box_hi = g.upper();
    opt.lambda = lambda;
    const double span = cfg.schedule.back() - cfg.schedule.front();
    const double steps_estimate = std::ceil(span / opt.max_step);
    opt.record_every = static_cast<std::size_t>(std::max(1.0, std::floor(steps_estimate / 200.0)));
    for (;; ++run.halvings) {
        try {
            const auto r = classical::integrate(ensemble, potential, cfg.schedule, opt, &curves);
            run.dt = r.step;
            run.max_energy_drift = r.max_energy_drift;
            for (double d : r.max_deviation) run.max_deviation = std::max(run.max_deviation, d);
            run.min_pair_distance = r.min_pair_distance;
            run.steps = r.steps;
            run.occupancy = stage("occupancy", [&] {
                if (cfg.has_momentum()) {
                    const auto mom = cfg.momenta();
                    return classical::occupancy(r.snapshots, cfg.positions(), &mom);
                }
                return classical::occupancy(r.snapshots, cfg.positions());
            });
            trajectory = classical::trajectory_csv(r.trajectory, g.dim());
            return run;
        } catch (const StabilityError&) {
            if (run.halvings >= cfg.max_halvings) throw;
            opt.max_step *= 0.5;
            opt.record_every *= 2;
        }
    }
}

void check_bounds(ClassicalRun& run, const std::vector<std::vector<double>>& P,
                  const std::vector<std::vector<double>>& P_tilde, long double bound) {
    auto gaps = [&](const std::vector<std::vector<double>>& q, const std::vector<std::vector<double>>& pi,
                    std::vector<long double>& out) {
        bool ok = true;
        for (std::size_t j = 0; j < q.size(); ++j) {
            long double worst = 0;
            for (std::size_t k = 0; k < q[j].size(); ++k)
                worst = std::max(worst, std::fabs(static_cast<long double>(q[j][k]) - pi[j][k]));
            out.push_back(worst);
            ok = ok && worst < bound;
        }
        return ok;
    };
    run.position_ok = gaps(P, run.occupancy.pi, run.position_gap);
    run.momentum_ok = P_tilde.empty() || gaps(P_tilde, run.occupancy.pi_tilde, run.momentum_gap);
}

json run_json(const ClassicalRun& r, std::uint64_t N) {
    json j;
    j["lambda"] = r.lambda;
    j["dt"] = r.dt;
    j["dt_halvings"] = r.halvings;
    j["steps"] = r.steps;
    j["max_energy_drift"] = r.max_energy_drift;
    j["max_deviation"] = r.max_deviation;
    j["min_pair_distance"] = std::isfinite(r.min_pair_distance) ? json(r.min_pair_distance) : json();
    j["pi"] = r.occupancy.pi;
    j["counts"] = r.occupancy.counts;
    std::vector<std::string> pg, mg;
    for (auto g : r.position_gap) pg.push_back(long_text(g));
    for (auto g : r.momentum_gap) mg.push_back(long_text(g));
    j["position_gap"] = pg;
    if (r.occupancy.has_momentum) {
        j["pi_tilde"] = r.occupancy.pi_tilde;
        j["counts_tilde"] = r.occupancy.counts_tilde;
        j["momentum_gap"] = mg;
    }
    std::vector<double> sums;
    for (const auto& row : r.occupancy.counts) {
        long t = 0;
        for (int c : row) t += c;
        sums.push_back(static_cast<double>(t) / static_cast<double>(N));
    }
    j["pi_sums"] = sums;
    j["position_bound_ok"] = r.position_ok;
    j["momentum_bound_ok"] = r.momentum_ok;
    j["sums_ok"] = r.sums_ok;
    return j;
}

bool counts_sum_to(const std::vector<std::vector<int>>& counts, std::uint64_t N) {
    for (const auto& row : counts) {
        std::uint64_t t = 0;
        for (int c : row) t += static_cast<std::uint64_t>(c);
        if (t != N) return false;
    }
    return true;
}

std::vector<std::vector<int>> numerator_counts(const diophantine::RationalApproximation& a, std::size_t first,
                                               std::size_t count) {
    std::vector<std::vector<int>> out;
    for (std::size_t g = first; g < first + count; ++g) {
        std::vector<int> row;
        for (auto v : a.numerators[g]) row.push_back(static_cast<int>(v));
        out.push_back(std::move(row));
    }
    return out;
}

void insensitivity_stage(DiscriminationReport& rep, const ExperimentConfig& cfg, const quantum::QuantumSystem& system,
                         const quantum::Wavefunction& psi0, const scratch::ScratchedPotential& scratched) {
    quantum::InsensitivityOptions iopt;
    iopt.propagation.max_step = cfg.propagation_step;
    iopt.propagation.norm_tolerance = cfg.tolerances.norm;
    iopt.propagation.edge_eps = cfg.tolerances.edge_eps;
    rep.insensitivity = stage("insensitivity", [&] {
        return quantum::scratch_insensitivity(system, scratched, psi0, cfg.checkpoints(), cfg.insensitivity_lambdas,
                                              iopt);
    });
    std::vector<double> lam, l2, l1;
    for (const auto& r : rep.insensitivity.rows) {
        lam.push_back(r.lambda);
        l2.push_back(r.l2_wavefunction);
        l1.push_back(r.l1_potential);
    }
    const bool decays = quantum::decays(lam, l2, 0.05, rep.insensitivity.grid_floor_lambda);
    const bool final_ok = l2.back() < cfg.tolerances.eps_q;
    bool l1_strict = true;
    for (std::size_t i = 1; i < l1.size(); ++i) l1_strict = l1_strict && l1[i] < l1[i - 1];
    rep.criteria["insensitivity_psi_decays_to_floor"] = decays;
    rep.criteria["insensitivity_psi_final_below_eps_q"] = final_ok;
    rep.criteria["insensitivity_l1_strictly_decreasing"] = l1_strict;
    json rows = json::array();
    for (const auto& r : rep.insensitivity.rows)
        rows.push_back({{"lambda", r.lambda},
                        {"l1_potential", r.l1_potential},
                        {"linf_fourier", r.linf_fourier},
                        {"l2_wavefunction", r.l2_wavefunction}});
    rep.data["insensitivity"] = {{"rows", rows},
                                 {"grid_floor_lambda", rep.insensitivity.grid_floor_lambda},
                                 {"eps_q", cfg.tolerances.eps_q}};
    rep.files["insensitivity.csv"] = rep.insensitivity.to_csv();
}

json quantum_json(const QuantumStage& q) {
    return {{"steps", q.result.steps},
            {"max_norm_drift", q.result.max_norm_drift},
            {"max_edge_mass", q.result.max_edge_mass},
            {"confinement_warning", q.result.confinement_warning},
            {"raw_P", table_json(q.raw_P)},
            {"renormalization_gap_P", q.gap_P},
            {"P", table_json(q.P)},
            {"raw_P_tilde", table_json(q.raw_P_tilde)},
            {"renormalization_gap_P_tilde", q.gap_P_tilde},
            {"P_tilde", table_json(q.P_tilde)}};
}

void classical_stage(DiscriminationReport& rep, const ExperimentConfig& cfg,
                     const classical::ClassicalEnsemble& ensemble, const scratch::ScratchedPotential& base,
                     const std::vector<geometry::ScratchCurve>& curves, double u_max, double min_pair,
                     const grid::SpatialGrid& g) {
    json runs = json::array();
    for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
        const double lambda = cfg.lambdas[i];
        const auto pot = base.with_lambda(lambda);
        std::string traj;
        auto run = stage("classical", [&] {
            return run_classical(cfg, ensemble, pot, curves, lambda, u_max, min_pair, g, traj);
        });
        check_bounds(run, rep.P, rep.P_tilde, rep.bound);
        run.sums_ok = counts_sum_to(run.occupancy.counts, rep.N) &&
                      (!run.occupancy.has_momentum || counts_sum_to(run.occupancy.counts_tilde, rep.N));
        std::ostringstream name;
        name << "occupancy_lambda_" << i << ".csv";
        rep.files[name.str()] = classical::occupancy_csv(run.occupancy, cfg.schedule);
        if (i + 1 == cfg.lambdas.size()) rep.files["trajectory.csv"] = traj;
        runs.push_back(run_json(run, rep.N));
        rep.runs.push_back(std::move(run));
    }
    rep.data["classical"] = runs;
    const auto& last = rep.final_run();
    rep.criteria["position_bound_all_checkpoints"] = last.position_ok;
    if (!rep.P_tilde.empty()) rep.criteria["momentum_bound_all_checkpoints"] = last.momentum_ok;
    rep.criteria["occupancy_sums_to_one"] = last.sums_ok;
    // Energy drift beyond tolerance raises, so reaching here means it held.
    rep.criteria["energy_drift_within_tolerance"] = true;
}

json bound_json(const DiscriminationReport& rep) {
    return {{"value", long_text(rep.bound)},
            {"value_double", static_cast<double>(rep.bound)},
            {"N", rep.N},
            {"Q", rep.Q},
            {"n", rep.n},
            {"groups", rep.groups},
            {"formula", "1/(N*Q^(1/(groups*n)))"}};
}

}  // namespace

long double discrimination_bound(std::uint64_t N, std::uint64_t Q, int groups, int n) {
    if (N == 0 || Q == 0 || groups < 1 || n < 1) throw DomainError("bound needs positive N, Q, groups and n");
    return 1.0L / (static_cast<long double>(N) *
                   std::pow(static_cast<long double>(Q), 1.0L / static_cast<long double>(groups * n)));
}

std::vector<std::vector<double>> renormalize(const std::vector<std::vector<double>>& rows, std::vector<double>& gaps) {
    gaps.clear();
    std::vector<std::vector<double>> out;
    for (const auto& row : rows) {
        double s = 0.0;
        for (double v : row) s += v;
        if (!(s > 0.0)) throw DomainError("probabilities sum to zero");
        gaps.push_back(s - 1.0);
        std::vector<double> r;
        for (double v : row) r.push_back(v / s);
        out.push_back(std::move(r));
    }
    return out;
}

bool DiscriminationReport::passed() const {
    if (criteria.empty()) return false;
    for (const auto& [name, ok] : criteria)
        if (!ok) return false;
    return true;
}

std::string DiscriminationReport::json_text() const {
    json j = data;
    j["criteria"] = criteria;
    j["passed"] = passed();
    return j.dump(2) + "\n";
}

DiscriminationReport run_theorem1(const ExperimentConfig& cfg) {
    stage("config", [&] {
        if (cfg.mode != Mode::theorem1) throw DomainError("config is not a theorem-1 config");
        cfg.validate();
        return 0;
    });
    DiscriminationReport rep;
    rep.mode = Mode::theorem1;
    rep.n = cfg.regions();
    rep.K = 2;
    rep.groups = 2;
    rep.Q = cfg.Q;
    rep.times = cfg.schedule;
    const auto g = cfg.grid();
    const auto system = stage("config", [&] { return cfg.system(); });
    const auto psi0 = stage("config", [&] { return cfg.initial_wavefunction(); });

    const auto q = stage("quantum", [&] { return run_quantum(cfg, system, psi0, false); });
    rep.P = q.P;
    rep.data["quantum"] = quantum_json(q);
    rep.files["probabilities.csv"] = probabilities_csv(cfg.schedule, q.raw_P, q.P, {}, {});

    const auto prob = make_problem(q.P, {}, cfg.Q);
    const auto approx = stage("diophantine", [&] { return diophantine::solve(prob); });
    const auto cert = diophantine::verify(prob, approx);
    rep.criteria["diophantine_certificate"] = cert.passed();
    rep.N = approx.q;
    rep.bound = discrimination_bound(rep.N, rep.Q, rep.groups, rep.n);
    rep.data["diophantine"] = diophantine::to_json(approx, cert);
    rep.data["bound"] = bound_json(rep);
    const auto counts = numerator_counts(approx, 0, 2);

    // Waypoints and straight lines, re-sampled on construction failures.
    geometry::PathSet paths;
    int attempts = 0;
    std::vector<std::string> failures;
    stage("geometry", [&] {
        const auto assignment = geometry::assign_itineraries(counts, static_cast<int>(rep.N));
        geometry::WaypointOptions wopt;
        wopt.clearance = g.min_spacing();
        wopt.min_separation = cfg.delta_path();
        wopt.eps_coll = cfg.eps_coll();
        wopt.general_position = true;
        geometry::PathOptions popt;
        popt.mode = geometry::PathMode::line;
        popt.delta_path = cfg.delta_path();
        popt.min_approach = 0.5 * cfg.delta_path();
        popt.perturb_max = 0.1 * g.min_spacing();
        for (;; ++attempts) {
            try {
                const auto plan = geometry::sample_waypoints(g, cfg.positions(), assignment,
                                                             mix_seed(cfg.seed, 2 * attempts), wopt);
                popt.seed = mix_seed(cfg.seed, 2 * attempts + 1);
                paths = geometry::build_paths(plan, popt);
                return 0;
            } catch (const ConstructionError& e) {
                failures.push_back(e.what());
            } catch (const CapacityError& e) {
                failures.push_back(e.what());
            }
            if (attempts + 1 >= cfg.retries)
                throw ConstructionError("no admissible line set after " + std::to_string(cfg.retries) +
                                        " attempts; last: " + failures.back());
        }
    });
    rep.data["geometry"] = {{"attempts", attempts + 1},
                            {"failures", failures},
                            {"perturbations", paths.perturbations},
                            {"waypoints", geometry::to_json(paths.plan)}};

    const auto U = system.potential;
    const scratch::ScratchedPotential scratched(U, paths.curves, cfg.lambdas.back());
    rep.data["scratched_potential"] = scratched.to_json(cfg.potential);
    const auto ensemble = stage("classical", [&] {
        return classical::initialize_lines(paths.curves, cfg.mass, cfg.schedule.front(), cfg.schedule.back());
    });
    const double u_max = grid_max(*U, g, cfg.schedule);
    classical_stage(rep, cfg, ensemble, scratched, paths.curves, u_max, 0.5 * cfg.delta_path(), g);
    insensitivity_stage(rep, cfg, system, psi0, scratched);
    rep.data["mode"] = "theorem1";
    rep.data["config"] = cfg.source;
    return rep;
}

DiscriminationReport run_theorem2(const ExperimentConfig& cfg) {
    stage("config", [&] {
        if (cfg.mode != Mode::theorem2) throw DomainError("config is not a theorem-2 config");
        cfg.validate();
        return 0;
    });
    DiscriminationReport rep;
    rep.mode = Mode::theorem2;
    rep.n = cfg.regions();
    rep.K = static_cast<int>(cfg.schedule.size());
    const bool with_momentum = cfg.has_momentum();
    rep.groups = with_momentum ? 2 * rep.K : rep.K;
    rep.Q = cfg.Q;
    rep.times = cfg.schedule;
    const auto g = cfg.grid();
    const auto system = stage("config", [&] { return cfg.system(); });
    const auto psi0 = stage("config", [&] { return cfg.initial_wavefunction(); });
    const auto U = system.potential;
    stage("config", [&] {
        for (double t : cfg.schedule) {
            const auto f = quantum::sample(*U, g, t);
            for (double v : f.values())
                if (!(v > 0.0)) throw DomainError("theorem 2 needs U > 0 at every grid point");
        }
        return 0;
    });

    const auto q = stage("quantum", [&] { return run_quantum(cfg, system, psi0, with_momentum); });
    rep.P = q.P;
    rep.P_tilde = q.P_tilde;
    rep.data["quantum"] = quantum_json(q);
    rep.data["quantum"]["momentum_extent"] = q.momentum_extent;
    rep.files["probabilities.csv"] = probabilities_csv(cfg.schedule, q.raw_P, q.P, q.raw_P_tilde, q.P_tilde);

    const auto prob = make_problem(q.P, q.P_tilde, cfg.Q);
    const auto approx = stage("diophantine", [&] { return diophantine::solve(prob); });
    const auto cert = diophantine::verify(prob, approx);
    rep.criteria["diophantine_certificate"] = cert.passed();
    rep.N = approx.q;
    rep.bound = discrimination_bound(rep.N, rep.Q, rep.groups, rep.n);
    rep.data["diophantine"] = diophantine::to_json(approx, cert);
    rep.data["bound"] = bound_json(rep);
    rep.data["position_only"] = !with_momentum;
    const auto K = static_cast<std::size_t>(rep.K);
    const auto counts = numerator_counts(approx, 0, K);
    const auto counts_tilde = with_momentum ? numerator_counts(approx, K, K) : std::vector<std::vector<int>>{};

    const double R_max = std::sqrt(40.0 / cfg.lambdas.back());
    geometry::PathOptions popt;
    popt.mode = geometry::PathMode::spline;
    popt.delta_path = cfg.delta_path();
    popt.min_curvature_radius = 2.0 * R_max;
    geometry::PathSet paths;
    geometry::MomentumConditioning mc;
    std::vector<scratch::TangentialPotential> V;
    std::vector<double> shifts;
    int attempts = 0;
    std::vector<std::string> failures;
    stage("geometry", [&] {
        const auto assignment = geometry::assign_itineraries(counts, static_cast<int>(rep.N));
        geometry::WaypointOptions wopt;
        wopt.clearance = g.min_spacing();
        wopt.min_separation = cfg.delta_path();
        wopt.eps_coll = cfg.eps_coll();
        for (;; ++attempts) {
            try {
                const auto plan =
                    geometry::sample_waypoints(g, cfg.positions(), assignment, mix_seed(cfg.seed, attempts), wopt);
                paths = geometry::build_paths(plan, popt);
                if (with_momentum) {
                    geometry::ConditioningOptions copt;
                    copt.mass = cfg.mass;
                    copt.times = cfg.schedule;
                    copt.momentum_extent = q.momentum_extent;
                    copt.paths = popt;
                    mc = geometry::condition_momenta(paths.curves, cfg.momenta(), counts_tilde, copt);
                } else {
                    // Position only: the speed at each knot is the mean of the adjacent secants.
                    mc = geometry::MomentumConditioning{};
                    for (const auto& c : paths.curves) {
                        const auto& s = c.knots();
                        std::vector<double> sp(K);
                        for (std::size_t j = 0; j < K; ++j) {
                            double acc = 0.0;
                            int m = 0;
                            if (j > 0) acc += (s[j] - s[j - 1]) / (cfg.schedule[j] - cfg.schedule[j - 1]), ++m;
                            if (j + 1 < K) acc += (s[j + 1] - s[j]) / (cfg.schedule[j + 1] - cfg.schedule[j]), ++m;
                            sp[j] = acc / m;
                        }
                        mc.speed.push_back(sp);
                        mc.direction.push_back(std::vector<Vec>(K));
                        mc.region.push_back(std::vector<int>(K, 0));
                    }
                }
                V.clear();
                shifts.clear();
                for (std::size_t l = 0; l < paths.curves.size(); ++l) {
                    const auto& c = paths.curves[l];
                    auto v = scratch::construct_tangential_potential(
                        c, scratch::TimingConditions{cfg.schedule, c.knots(), mc.speed[l]}, cfg.mass);
                    // Keep V below U along the curve so the transverse stiffness 2 lambda (U - V) stays positive.
                    double excess = -std::numeric_limits<double>::infinity();
                    double u_low = std::numeric_limits<double>::infinity();
                    for (int i = 0; i <= 2000; ++i) {
                        const double s = i / 2000.0;
                        const double u = U->value(c.point(s), cfg.schedule.front());
                        excess = std::max(excess, v.value(s) - u);
                        u_low = std::min(u_low, u);
                    }
                    const double shift = -(excess + 0.5 * u_low);
                    v.shift(shift);
                    shifts.push_back(shift);
                    V.push_back(std::move(v));
                }
                return 0;
            } catch (const ConstructionError& e) {
                failures.push_back(e.what());
            } catch (const ConditioningError& e) {
                failures.push_back(e.what());
            } catch (const InfeasibleTimingError& e) {
                failures.push_back(e.what());
            } catch (const CapacityError& e) {
                failures.push_back(e.what());
            }
            if (attempts + 1 >= cfg.retries)
                throw ConstructionError("no admissible path set after " + std::to_string(cfg.retries) +
                                        " attempts; last: " + failures.back());
        }
    });
    json curves = json::array();
    for (const auto& c : paths.curves) curves.push_back(geometry::to_json(c));
    rep.data["geometry"] = {{"attempts", attempts + 1},
                            {"failures", failures},
                            {"waypoints", geometry::to_json(paths.plan)},
                            {"curves", curves},
                            {"tangential_shifts", shifts}};
    if (with_momentum) rep.data["geometry"]["conditioning"] = geometry::to_json(mc, g.dim());

    const scratch::ScratchedPotential scratched(U, paths.curves, cfg.lambdas.back(), V);
    rep.data["scratched_potential"] = scratched.to_json(cfg.potential);
    const auto ensemble = stage("classical", [&] {
        return classical::initialize_on_scratches(paths.curves, mc, cfg.mass);
    });
    // Transverse stiffness is 2 lambda (U - V) inside the tubes, 2 lambda U elsewhere.
    double u_max = grid_max(*U, g, cfg.schedule);
    for (std::size_t l = 0; l < paths.curves.size(); ++l)
        for (int i = 0; i <= 2000; ++i) {
            const double s = i / 2000.0;
            u_max = std::max(u_max, U->value(paths.curves[l].point(s), cfg.schedule.front()) - V[l].value(s));
        }
    classical_stage(rep, cfg, ensemble, scratched, paths.curves, u_max, 0.5 * cfg.delta_path(), g);
    insensitivity_stage(rep, cfg, system, psi0, scratched);
    rep.data["mode"] = "theorem2";
    rep.data["config"] = cfg.source;
    return rep;
}

json measurement_records(const DiscriminationReport& rep, double resolution) {
    if (!(resolution > 0.0)) throw DomainError("instrument resolution must be positive");
    const auto& run = rep.final_run();
    auto quantize = [&](const std::vector<std::vector<double>>& t) {
        std::vector<std::vector<long long>> out;
        for (const auto& row : t) {
            std::vector<long long> r;
            for (double v : row) r.push_back(std::llround(v / resolution));
            out.push_back(std::move(r));
        }
        return out;
    };
    double raw_gap = 0.0;
    int differing = 0;
    auto compare = [&](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
        const auto qa = quantize(a), qb = quantize(b);
        for (std::size_t j = 0; j < a.size(); ++j)
            for (std::size_t k = 0; k < a[j].size(); ++k) {
                raw_gap = std::max(raw_gap, std::fabs(a[j][k] - b[j][k]));
                if (qa[j][k] != qb[j][k]) ++differing;
            }
    };
    compare(rep.P, run.occupancy.pi);
    json j;
    j["resolution"] = resolution;
    j["bound"] = static_cast<double>(rep.bound);
    j["quantum_position"] = quantize(rep.P);
    j["classical_position"] = quantize(run.occupancy.pi);
    if (!rep.P_tilde.empty()) {
        compare(rep.P_tilde, run.occupancy.pi_tilde);
        j["quantum_momentum"] = quantize(rep.P_tilde);
        j["classical_momentum"] = quantize(run.occupancy.pi_tilde);
    }
    j["max_raw_difference"] = raw_gap;
    j["differing_readings"] = differing;
    j["records_identical"] = differing == 0;
    j["resolution_at_least_bound"] = static_cast<long double>(resolution) >= rep.bound;
    j["indistinguishable"] = raw_gap < resolution;
    j["distinguishable"] = differing > 0;
    return j;
}

DiscriminationReport run_blackbox(const ExperimentConfig& cfg) {
    auto rep = run_theorem2(cfg);
    const double resolution =
        cfg.resolution > 0.0 ? cfg.resolution : cfg.resolution_factor * static_cast<double>(rep.bound);
    const auto records = measurement_records(rep, resolution);
    rep.data["blackbox"] = records;
    // The theorem guarantees indistinguishability only at resolutions no finer than the bound.
    if (records["resolution_at_least_bound"].get<bool>())
        rep.criteria["blackbox_indistinguishable"] = records["indistinguishable"].get<bool>();
    rep.data["mode"] = "blackbox";
    return rep;
}

DiscriminationReport run(const ExperimentConfig& cfg) {
    return cfg.mode == Mode::theorem1 ? run_theorem1(cfg) : run_theorem2(cfg);
}

void write_report(const DiscriminationReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DomainError("cannot write " + (dir / name).string());
        out << text;
    };
    put("report.json", rep.json_text());
    for (const auto& [name, text] : rep.files) put(name, text);
}

}  // namespace scratchsim::experiment
