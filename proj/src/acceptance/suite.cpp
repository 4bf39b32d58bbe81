#include "scratchsim/acceptance/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "scratchsim/classical/ensemble.hpp"
#include "scratchsim/diophantine/approximation.hpp"
#include "scratchsim/error.hpp"
#include "scratchsim/experiment/pipeline.hpp"
#include "scratchsim/quantum/insensitivity.hpp"
#include "scratchsim/random.hpp"
#include "scratchsim/scratch/scratched.hpp"
#include "scratchsim/scratch/tangential.hpp"
#include "scratchsim/acceptance/oracles.hpp"

namespace scratchsim::acceptance {

using nlohmann::json;
using geometry::ScratchCurve;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CriterionResult start(int id, std::string title) {
    CriterionResult r;
    r.id = id;
    r.title = std::move(title);
    return r;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(4) << x;
    return os.str();
}

// Reports of pipeline runs within this process, keyed by config path, for the
// determinism rerun.
struct CachedRun {
    std::string report;
    std::map<std::string, std::string> files;
};
std::map<std::string, CachedRun>& run_cache() {
    static std::map<std::string, CachedRun> cache;
    return cache;
}

experiment::DiscriminationReport run_pipeline(const std::filesystem::path& config) {
    const auto cfg = experiment::ExperimentConfig::load(config);
    auto rep = experiment::run(cfg);
    run_cache()[config.string()] = {rep.json_text(), rep.files};
    return rep;
}

long double max_gap(const std::vector<long double>& gaps) {
    long double m = 0;
    for (auto g : gaps) m = std::max(m, g);
    return m;
}

CriterionResult pipeline_criterion(int id, const char* title, const SuiteOptions& options, const char* file,
                                   double budget, bool momentum) {
    CriterionResult r = start(id, title);
    const auto t0 = Clock::now();
    const auto path = options.config_dir / file;
    try {
        const auto rep = run_pipeline(path);
        r.seconds = seconds_since(t0);
        if (!options.out_dir.empty()) experiment::write_report(rep, options.out_dir / std::filesystem::path(file).stem());
        const auto& run = rep.final_run();
        const bool pos = rep.criteria.at("position_bound_all_checkpoints");
        const bool mom = !momentum || rep.criteria.at("momentum_bound_all_checkpoints");
        const bool sums = rep.criteria.at("occupancy_sums_to_one");
        const bool cert = rep.criteria.at("diophantine_certificate");
        r.passed = pos && mom && sums && cert && r.seconds < budget;
        std::ostringstream os;
        os << "N=" << rep.N << " Q=" << rep.Q << " bound=" << fmt(static_cast<double>(rep.bound))
           << " max|P-pi|=" << fmt(static_cast<double>(max_gap(run.position_gap)));
        if (momentum) os << " max|Pt-pit|=" << fmt(static_cast<double>(max_gap(run.momentum_gap)));
        os << " sums=" << (sums ? "1" : "off") << " lambda=" << fmt(run.lambda) << " budget=" << budget << "s";
        r.summary = os.str();
        r.detail = json::parse(rep.json_text());
    } catch (const Error& e) {
        r.seconds = seconds_since(t0);
        r.summary = e.what();
    }
    return r;
}

std::shared_ptr<const quantum::Potential> smooth_positive(int dim) {
    return std::make_shared<quantum::HarmonicPotential>(dim, Vec(0.3, 0.5, 0.4), Vec(0.2, -0.1, 0.0), 1.0);
}

ScratchCurve helix() {
    std::vector<Vec> pts;
    for (int i = 0; i <= 8; ++i) {
        const double a = 2 * M_PI * i / 8.0;
        pts.push_back(Vec(2 * std::cos(a), 2 * std::sin(a), 0.8 * a));
    }
    return ScratchCurve::clamped_spline(3, pts);
}

double max_base_gradient(const quantum::Potential& U, const grid::SpatialGrid& g) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, norm(U.gradient(g.point(i), 0)));
    return m;
}

}  // namespace

CriterionResult check_diophantine() {
    CriterionResult r = start(1, "diophantine lemma: 1000 random problems certify, 50 match the exhaustive oracle");
    const auto t0 = Clock::now();
    Rng rng(7771);
    int failures = 0;
    std::uint64_t max_Q = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const int K = 1 + static_cast<int>(rng() % 3);
        const auto p = oracle::random_problem(rng, n, K);
        max_Q = std::max(max_Q, p.Q);
        const auto a = diophantine::solve(p);
        if (!diophantine::verify(p, a).passed() || a.q > p.Q) ++failures;
    }
    int disagreements = 0;
    Rng orng(20240601);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(orng() % 4);
        const int K = 1 + static_cast<int>(orng() % 3);
        const auto p = oracle::random_problem(orng, n, K);
        if (diophantine::solve(p).q != oracle::exhaustive_smallest_q(p)) ++disagreements;
    }
    r.seconds = seconds_since(t0);
    r.passed = failures == 0 && disagreements == 0 && r.seconds < 60.0;
    r.summary = "certificate failures=" + std::to_string(failures) + "/1000 oracle disagreements=" +
                std::to_string(disagreements) + "/50 largest Q=" + std::to_string(max_Q) + " budget=60s";
    r.detail = {{"failures", failures}, {"disagreements", disagreements}, {"largest_Q", max_Q}};
    return r;
}

CriterionResult check_theorem1(const SuiteOptions& options) {
    return pipeline_criterion(2, "theorem-1 pipeline: position bound at t_i and t_f, sums equal 1", options,
                              "theorem1.json", 300.0, false);
}

CriterionResult check_theorem2(const SuiteOptions& options) {
    return pipeline_criterion(3, "theorem-2 pipeline: position and momentum bounds at every t_j, sums equal 1",
                              options, "theorem2.json", 1800.0, true);
}

CriterionResult check_insensitivity(const SuiteOptions& options) {
    CriterionResult r = start(4, "quantum insensitivity: L1 slope -(D-1)/2 and Psi decay to the grid floor");
    const auto t0 = Clock::now();
    const std::vector<double> lambdas{1e2, 1e3, 1e4};
    json detail;
    bool ok = true;
    std::ostringstream os;
    try {
        const auto cfg1 = experiment::ExperimentConfig::load(options.config_dir / "theorem1.json");
        const auto cfg2 = experiment::ExperimentConfig::load(options.config_dir / "theorem2.json");
        // L1 against line-aligned cubature in D = 2 and D = 3.
        struct Case {
            int dim;
            std::shared_ptr<const quantum::Potential> U;
            grid::SpatialGrid box;
            Vec a, b;
        };
        const std::vector<Case> cases{
            {2, cfg1.make_potential(), cfg1.grid(), Vec(-3.0, -2.1), Vec(3.0, 1.9)},
            {3, cfg2.make_potential(), cfg2.grid(), Vec(-2.0, -1.0, 0.5), Vec(2.0, 1.5, -0.5)}};
        for (const auto& c : cases) {
            const scratch::ScratchedPotential pot(c.U, {ScratchCurve::line(c.dim, c.a, c.b)}, 1.0);
            std::vector<double> l1;
            double worst_rel = 0.0;
            for (double lam : lambdas) {
                const auto p = pot.with_lambda(lam);
                l1.push_back(quantum::scratch_l1_difference(p, c.box));
                const double ref = c.dim == 2 ? oracle::strip_oracle(*c.U, c.a, c.b, lam, p.tube_radius())
                                              : oracle::cylinder_oracle(*c.U, c.a, c.b, lam, p.tube_radius());
                worst_rel = std::max(worst_rel, std::fabs(l1.back() - ref) / ref);
            }
            const double slope = quantum::log_log_slope(lambdas, l1);
            const double expected = -(c.dim - 1) / 2.0;
            const bool slope_ok = std::fabs(slope - expected) <= 0.15;
            const bool oracle_ok = worst_rel < 1e-6;
            ok = ok && slope_ok && oracle_ok;
            os << "D=" << c.dim << " slope=" << fmt(slope) << " (want " << expected << ") oracle rel=" << fmt(worst_rel)
               << "; ";
            detail["l1_D" + std::to_string(c.dim)] = {
                {"l1", l1}, {"slope", slope}, {"oracle_max_relative_difference", worst_rel}};
        }
        // Psi on the theorem-1 system with one straight scratch.
        const auto system = cfg1.system();
        const scratch::ScratchedPotential line(system.potential, {ScratchCurve::line(2, Vec(-3.0, -2.1), Vec(3.0, 1.9))},
                                               1.0);
        quantum::InsensitivityOptions iopt;
        iopt.propagation.max_step = cfg1.propagation_step;
        iopt.propagation.norm_tolerance = cfg1.tolerances.norm;
        iopt.propagation.edge_eps = cfg1.tolerances.edge_eps;
        const auto table = quantum::scratch_insensitivity(system, line, cfg1.initial_wavefunction(), cfg1.checkpoints(),
                                                          cfg1.insensitivity_lambdas, iopt);
        std::vector<double> lam, l2;
        for (const auto& row : table.rows) {
            lam.push_back(row.lambda);
            l2.push_back(row.l2_wavefunction);
        }
        const bool decays = quantum::decays(lam, l2, 0.05, table.grid_floor_lambda);
        const bool final_ok = l2.back() < cfg1.tolerances.eps_q;
        ok = ok && decays && final_ok;
        os << "Psi L2 " << fmt(l2.front()) << " -> " << fmt(l2.back()) << " at lambda=" << fmt(lam.back())
           << " floor=" << fmt(table.grid_floor_lambda) << (decays ? " decays" : " NOT decaying");
        detail["psi"] = {{"lambda", lam}, {"l2", l2}, {"grid_floor_lambda", table.grid_floor_lambda}};
    } catch (const Error& e) {
        ok = false;
        os << e.what();
    }
    r.seconds = seconds_since(t0);
    r.passed = ok;
    r.summary = os.str();
    r.detail = detail;
    return r;
}

CriterionResult check_scratch_structure() {
    CriterionResult r = start(5, "scratch structure: on-curve value and force, Hessian null direction and lambda scaling");
    const auto t0 = Clock::now();
    Rng rng(515);
    bool ok = true;
    double worst_value = 0.0, worst_grad = 0.0, worst_modified = 0.0, worst_null = 0.0, worst_scaling = 0.0;
    double worst_align = 1.0, smallest_positive = 1e300;
    try {
        struct Case {
            int dim;
            ScratchCurve curve;
            grid::SpatialGrid box;
        };
        const std::vector<Case> cases{
            {2, ScratchCurve::clamped_spline(2, {Vec(-3, 0), Vec(0, 2), Vec(3, -1)}), grid::SpatialGrid::cube(2, 101, -5, 5)},
            {3, helix(), grid::SpatialGrid::cube(3, 31, -4, 8)}};
        for (const auto& c : cases) {
            const auto base = smooth_positive(c.dim);
            const double gmax = max_base_gradient(*base, c.box);
            double umax = 0.0;
            for (std::size_t i = 0; i < c.box.size(); ++i) umax = std::max(umax, base->value(c.box.point(i), 0));
            // A tangential term with V < U along the curve for the modified form.
            const auto& knots = c.curve.knots();
            std::vector<double> times, speeds;
            for (std::size_t j = 0; j < knots.size(); ++j) {
                times.push_back(knots[j]);
                speeds.push_back(j % 2 ? 1.1 : 0.9);
            }
            auto V = scratch::construct_tangential_potential(c.curve, {times, knots, speeds}, 1.0);
            double vmax = -1e300, umin = 1e300;
            for (int i = 0; i <= 400; ++i) {
                vmax = std::max(vmax, V.value(i / 400.0));
                umin = std::min(umin, base->value(c.curve.point(i / 400.0), 0));
            }
            V.shift(-(vmax - 0.5 * umin));
            for (double lambda : {1e2, 1e3, 1e4}) {
                const scratch::ScratchedPotential plain(base, {c.curve}, lambda);
                const scratch::ScratchedPotential modified(base, {c.curve}, lambda, {V});
                for (int i = 0; i < 1000; ++i) {
                    const double s = uniform01(rng);
                    const Vec q = c.curve.point(s);
                    const auto e = plain.eval(q);
                    worst_value = std::max(worst_value, std::fabs(e.value) / umax);
                    worst_grad = std::max(worst_grad, norm(e.gradient) / gmax);
                    const auto m = modified.eval(q);
                    const Vec t = normalized(c.curve.derivative(s));
                    const Vec transverse = m.gradient - dot(m.gradient, t) * t;
                    worst_modified = std::max(worst_modified, std::fabs(m.value - V.value(s)) / umax);
                    worst_grad = std::max(worst_grad, norm(transverse) / gmax);
                }
                for (int i = 0; i < 100; ++i) {
                    const double s = uniform01(rng);
                    const auto sp = scratch::hessian_on_scratch(plain, 0, s);
                    const auto doubled = scratch::hessian_on_scratch(plain.with_lambda(2 * lambda), 0, s);
                    worst_null = std::max(worst_null, sp.null_ratio);
                    worst_align = std::min(worst_align, sp.tangent_alignment);
                    for (int k = 1; k < c.dim; ++k) {
                        smallest_positive = std::min(smallest_positive, sp.eigenvalues[k]);
                        worst_scaling =
                            std::max(worst_scaling, std::fabs(doubled.eigenvalues[k] / sp.eigenvalues[k] - 2.0) / 2.0);
                    }
                }
            }
        }
        ok = worst_value <= 1e-10 && worst_modified <= 1e-10 && worst_grad <= 1e-10 && worst_null <= 1e-6 &&
             smallest_positive > 0.0 && worst_scaling <= 0.02 && worst_align >= 0.999;
    } catch (const Error& e) {
        ok = false;
        r.summary = e.what();
    }
    r.seconds = seconds_since(t0);
    r.passed = ok;
    if (r.summary.empty())
        r.summary = "|U^l|/maxU=" + fmt(worst_value) + " |U^l-V|/maxU=" + fmt(worst_modified) +
                    " |grad|/max|gradU|=" + fmt(worst_grad) + " null ratio=" + fmt(worst_null) +
                    " doubling error=" + fmt(worst_scaling) + " min cos=" + fmt(worst_align);
    r.detail = {{"value", worst_value},         {"modified_value", worst_modified}, {"gradient", worst_grad},
                {"null_ratio", worst_null},     {"doubling_error", worst_scaling}, {"tangent_alignment", worst_align},
                {"smallest_positive", smallest_positive}};
    return r;
}

CriterionResult check_constrained_motion() {
    CriterionResult r = start(6, "constrained motion: deviation decays over lambda = 1e2..1e5, < h/10, energy drift < 1e-6");
    const auto t0 = Clock::now();
    const double h = 16.0 / 256.0;
    std::vector<double> dev, drift;
    bool ok = true;
    try {
        auto U = std::make_shared<quantum::HarmonicPotential>(2, Vec(0.4, 0.3), Vec(0.5, -1.0), 1.0);
        const auto line = ScratchCurve::line(2, Vec(-3, -1), Vec(3, 2));
        const std::vector<ScratchCurve> curves{line};
        for (double lambda : {1e2, 1e3, 1e4, 1e5}) {
            const scratch::ScratchedPotential pot(U, curves, lambda);
            // Launched inside the scratch, clear of the end caps, with a transverse kick.
            auto e = classical::initialize_lines({ScratchCurve::line(2, line.point(0.05), line.point(0.95))}, 1.0, 0.0,
                                                 2.0);
            const Vec d = normalized(line.point(1.0) - line.point(0.0));
            e.particles[0].p += (1e-3 * norm(e.particles[0].p)) * Vec(-d[1], d[0]);
            classical::IntegrationOptions opt;
            opt.max_step = classical::stiffness_step(lambda, 12.0, 1.0);
            opt.energy_tolerance = 1e-6;
            opt.lambda = lambda;
            const auto res = classical::integrate(e, pot, {0.0, 1.0, 2.0}, opt, &curves);
            if (!dev.empty()) ok = ok && res.max_deviation[0] <= 1.05 * dev.back();
            dev.push_back(res.max_deviation[0]);
            drift.push_back(res.max_energy_drift);
            ok = ok && res.max_energy_drift < 1e-6;
        }
        ok = ok && dev.back() < h / 10;
    } catch (const Error& e) {
        ok = false;
        r.summary = e.what();
    }
    r.seconds = seconds_since(t0);
    r.passed = ok;
    if (r.summary.empty()) {
        std::ostringstream os;
        os << "deviation";
        for (double d : dev) os << ' ' << fmt(d);
        os << " (h/10=" << fmt(h / 10) << ") max drift=" << fmt(*std::max_element(drift.begin(), drift.end()));
        r.summary = os.str();
    }
    r.detail = {{"lambda", {1e2, 1e3, 1e4, 1e5}}, {"max_deviation", dev}, {"energy_drift", drift}};
    return r;
}

CriterionResult check_inverse_timing() {
    CriterionResult r = start(7, "inverse V: 100 random timing sets met by forward integration");
    const auto t0 = Clock::now();
    Rng rng(77);
    int accepted = 0, infeasible = 0, failures = 0;
    double worst_s = 0.0, worst_v = 0.0;
    while (accepted < 100) {
        const int K = 2 + static_cast<int>(rng() % 3);
        std::vector<Vec> pts;
        for (int j = 0; j < K; ++j)
            pts.push_back(Vec(2.0 * j + uniform(rng, -0.5, 0.5), uniform(rng, -1, 1), uniform(rng, -1, 1)));
        const auto c = ScratchCurve::clamped_spline(3, pts);
        const auto tc = oracle::random_timing(rng, c);
        scratch::TangentialPotential V;
        try {
            V = scratch::construct_tangential_potential(c, tc, 1.0);
        } catch (const InfeasibleTimingError&) {
            ++infeasible;
            continue;
        }
        ++accepted;
        const auto traj = oracle::integrate_lagrange(c, V, 1.0, tc.times, tc.s[0], tc.speeds[0], 2e-4);
        bool trial_ok = true;
        for (int j = 0; j < K; ++j) {
            const double ds = std::fabs(traj[j].s - tc.s[j]);
            const double dv = std::fabs(traj[j].sdot - tc.speeds[j]) / tc.speeds[j];
            worst_s = std::max(worst_s, ds);
            worst_v = std::max(worst_v, dv);
            trial_ok = trial_ok && ds < 1e-3 && dv < 1e-2;
        }
        if (!trial_ok) ++failures;
    }
    r.seconds = seconds_since(t0);
    r.passed = failures == 0;
    r.summary = "failures=" + std::to_string(failures) + "/100 max|ds|=" + fmt(worst_s) +
                " max rel|dsdot|=" + fmt(worst_v) + " infeasible draws skipped=" + std::to_string(infeasible);
    r.detail = {{"failures", failures}, {"max_s_error", worst_s}, {"max_speed_error", worst_v},
                {"infeasible_skipped", infeasible}};
    return r;
}

CriterionResult check_determinism(const SuiteOptions& options) {
    CriterionResult r = start(8, "determinism: reruns reproduce report.json and artifacts byte for byte");
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream os;
    const char* sep = "";
    for (const char* file : {"theorem1.json", "theorem2.json"}) {
        const auto path = options.config_dir / file;
        os << sep;
        sep = "; ";
        try {
            if (!run_cache().count(path.string())) run_pipeline(path);
            const auto first = run_cache().at(path.string());
            run_pipeline(path);
            const auto& second = run_cache().at(path.string());
            const bool same = first.report == second.report && first.files == second.files;
            ok = ok && same;
            os << file << (same ? " identical" : " DIFFERS") << " (" << first.report.size() << " bytes)";
        } catch (const Error& e) {
            ok = false;
            os << file << ": " << e.what();
        }
    }
    r.seconds = seconds_since(t0);
    r.passed = ok;
    r.summary = os.str();
    return r;
}

std::string format_line(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << " (" << std::fixed << std::setprecision(1)
       << r.seconds << " s): " << r.summary;
    return os.str();
}

std::vector<CriterionResult> run_suite(const SuiteOptions& options, std::ostream& log) {
    auto selected = [&](int id) {
        return options.only.empty() || std::find(options.only.begin(), options.only.end(), id) != options.only.end();
    };
    std::vector<CriterionResult> out;
    auto record = [&](CriterionResult r) {
        log << format_line(r) << std::endl;
        out.push_back(std::move(r));
    };
    if (selected(1)) record(check_diophantine());
    if (selected(2)) record(check_theorem1(options));
    if (selected(3)) record(check_theorem2(options));
    if (selected(4)) record(check_insensitivity(options));
    if (selected(5)) record(check_scratch_structure());
    if (selected(6)) record(check_constrained_motion());
    if (selected(7)) record(check_inverse_timing());
    if (selected(8)) record(check_determinism(options));
    if (!options.out_dir.empty()) {
        std::filesystem::create_directories(options.out_dir);
        json summary = json::array();
        for (const auto& r : out)
            summary.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"summary", r.summary},
                               {"detail", r.detail}});
        std::ofstream(options.out_dir / "summary.json") << summary.dump(2) << '\n';
    }
    return out;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    return !results.empty() &&
           std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

}  // namespace scratchsim::acceptance
