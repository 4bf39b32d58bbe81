#include "scratchsim/experiment/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "scratchsim/error.hpp"
#include "scratchsim/grid/field_io.hpp"

namespace scratchsim::experiment {

namespace {

using nlohmann::json;

Vec vec_of(const json& j, int dim, const char* what) {
    if (j.is_number()) {
        Vec v;
        for (int a = 0; a < dim; ++a) v[a] = j.get<double>();
        return v;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw DomainError(std::string(what) + " needs " + std::to_string(dim) + " components");
    Vec v;
    for (int a = 0; a < dim; ++a) v[a] = j[a].get<double>();
    return v;
}

Vec vec_or_zero(const json& j, const char* key, int dim) {
    return j.contains(key) ? vec_of(j.at(key), dim, key) : Vec();
}

// Null or missing entries are unbounded.
double bound_of(const json& box, const char* key, int a, double fallback) {
    if (!box.contains(key) || box.at(key).is_null()) return fallback;
    const auto& v = box.at(key);
    if (!v.is_array() || a >= static_cast<int>(v.size())) throw DomainError(std::string("box ") + key + " is malformed");
    return v[a].is_null() ? fallback : v[a].get<double>();
}

template <class T>
std::vector<T> list_of(const json& j, const char* key) {
    if (!j.contains(key)) throw DomainError(std::string("config is missing '") + key + "'");
    return j.at(key).get<std::vector<T>>();
}

}  // namespace

std::uint64_t theorem_Q_floor(int n, int groups) {
    if (n < 1 || groups < 1) throw DomainError("need n >= 1 and at least one group");
    const int e = n * groups;
    std::uint64_t p = 1;
    for (int i = 0; i < e; ++i) {
        if (p > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(n))
            throw DomainError("n^(groups n) does not fit in 64 bits");
        p *= static_cast<std::uint64_t>(n);
    }
    return p + 1;
}

std::shared_ptr<const quantum::Potential> make_potential(const json& spec, int dim,
                                                         const std::filesystem::path& base_dir) {
    const std::string type = spec.value("type", "");
    if (type == "harmonic")
        return std::make_shared<quantum::HarmonicPotential>(dim, vec_of(spec.at("stiffness"), dim, "stiffness"),
                                                            vec_or_zero(spec, "center", dim), spec.value("offset", 0.0));
    if (type == "driven_harmonic")
        return std::make_shared<quantum::DrivenHarmonicPotential>(
            dim, vec_of(spec.at("stiffness"), dim, "stiffness"), vec_or_zero(spec, "center", dim),
            spec.value("offset", 0.0), spec.value("amplitude", 0.0), spec.value("omega", 1.0));
    if (type == "gaussian_well") {
        const double depth = spec.at("depth").get<double>();
        // Offset to positivity unless given.
        return std::make_shared<quantum::GaussianWellPotential>(dim, depth, spec.at("width").get<double>(),
                                                                vec_or_zero(spec, "center", dim),
                                                                spec.value("offset", depth + 1.0));
    }
    if (type == "double_well")
        return std::make_shared<quantum::DoubleWellPotential>(dim, spec.at("a").get<double>(), spec.at("b").get<double>(),
                                                              spec.value("k_perp", 1.0), spec.value("constant", 1.0));
    if (type == "tabulated") {
        std::filesystem::path p = spec.at("path").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        auto any = grid::read_field(p);
        if (!std::holds_alternative<grid::ScalarField>(any)) throw DomainError("tabulated potential must be real");
        auto& f = std::get<grid::ScalarField>(any);
        if (f.grid().dim() != dim) throw DomainError("tabulated potential has the wrong dimension");
        return std::make_shared<quantum::TabulatedPotential>(std::move(f));
    }
    throw DomainError("unknown potential type '" + type + "'");
}

grid::RegionPartition make_partition(const json& spec, int dim, grid::Space space) {
    const std::string type = spec.value("type", "");
    if (type == "half_spaces")
        return grid::RegionPartition::half_spaces(dim, space, spec.value("axis", 0), spec.value("at", 0.0));
    if (type == "orthants") return grid::RegionPartition::orthants(dim, space, vec_or_zero(spec, "center", dim));
    if (type == "boxes") {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<grid::Region> regions;
        for (const auto& r : spec.at("regions")) {
            grid::Region region;
            for (const auto& b : r) {
                grid::Box box;
                for (int a = 0; a < dim; ++a) {
                    box.lo[a] = bound_of(b, "lo", a, -inf);
                    box.hi[a] = bound_of(b, "hi", a, inf);
                }
                region.boxes.push_back(box);
            }
            regions.push_back(std::move(region));
        }
        return grid::RegionPartition(dim, space, std::move(regions));
    }
    throw DomainError("unknown partition type '" + type + "'");
}

grid::SpatialGrid ExperimentConfig::grid() const { return grid::SpatialGrid(shape, lo, hi); }

grid::RegionPartition ExperimentConfig::positions() const {
    return make_partition(position_partition, static_cast<int>(shape.size()), grid::Space::position);
}

grid::RegionPartition ExperimentConfig::momenta() const {
    if (!has_momentum()) throw DomainError("no momentum partition configured");
    return make_partition(momentum_partition, static_cast<int>(shape.size()), grid::Space::momentum);
}

std::shared_ptr<const quantum::Potential> ExperimentConfig::make_potential() const {
    return experiment::make_potential(potential, static_cast<int>(shape.size()), base_dir);
}

quantum::QuantumSystem ExperimentConfig::system() const { return {grid(), mass, hbar, make_potential()}; }

quantum::Wavefunction ExperimentConfig::initial_wavefunction() const {
    const int dim = static_cast<int>(shape.size());
    const std::string type = initial_state.value("type", "gaussian");
    if (type != "gaussian") throw DomainError("unknown initial state type '" + type + "'");
    return quantum::gaussian_packet(grid(), vec_or_zero(initial_state, "center", dim),
                                    initial_state.value("sigma", 1.0), vec_or_zero(initial_state, "momentum", dim),
                                    hbar, schedule.empty() ? 0.0 : schedule.front());
}

quantum::CheckpointSchedule ExperimentConfig::checkpoints() const {
    quantum::CheckpointSchedule s{schedule};
    s.validate();
    return s;
}

double ExperimentConfig::eps_coll() const {
    return tolerances.eps_coll > 0.0 ? tolerances.eps_coll : 1e-6 * grid().diagonal();
}

double ExperimentConfig::delta_path() const {
    return tolerances.delta_path > 0.0 ? tolerances.delta_path : 4.0 * grid().min_spacing();
}

int ExperimentConfig::regions() const { return positions().count(); }

void ExperimentConfig::validate() const {
    const auto g = grid();
    const int dim = g.dim();
    const auto part = positions();
    part.validate(g);
    const int n = part.count();
    const auto sched = checkpoints();
    const int K = static_cast<int>(sched.size());
    if (!(mass > 0.0) || !(hbar > 0.0)) throw DomainError("mass and hbar must be positive");
    if (lambdas.empty()) throw DomainError("the lambda list is empty");
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        if (!(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] > lambdas[i - 1])))
            throw DomainError("lambdas must be positive and increasing");
    if (!(propagation_step > 0.0) || !(dt_divisor > 0.0) || max_halvings < 0 || retries < 1)
        throw DomainError("step controls must be positive");
    if (mode == Mode::theorem1) {
        if (dim < 2) throw DomainError("theorem 1 needs D >= 2");
        if (K != 2) throw DomainError("theorem 1 compares exactly two checkpoints (K = 2)");
        if (has_momentum()) throw DomainError("theorem 1 has no momentum partition");
        const auto floor = theorem_Q_floor(n, 2);
        if (Q < floor)
            throw DomainError("theorem 1 needs Q > n^(2n) = " + std::to_string(floor - 1) + ", got Q = " +
                              std::to_string(Q));
    } else {
        if (dim != 3) throw DomainError("theorem 2 needs D = 3");
        if (K < 2) throw DomainError("theorem 2 needs K >= 2 checkpoints");
        if (has_momentum()) {
            const auto mom = momenta();
            if (mom.count() != n) throw DomainError("position and momentum partitions need the same n");
            mom.validate(g.momentum_grid(hbar));
        }
        const auto floor = theorem_Q_floor(n, has_momentum() ? 2 * K : K);
        if (Q < floor)
            throw DomainError(std::string("theorem 2 needs Q > ") + (has_momentum() ? "n^(2Kn)" : "n^(Kn)") + " = " +
                              std::to_string(floor - 1) + ", got Q = " + std::to_string(Q));
    }
}

ExperimentConfig ExperimentConfig::from_json(const json& j, std::filesystem::path base_dir) {
    try {
        ExperimentConfig c;
        c.source = j;
        c.base_dir = std::move(base_dir);
        const std::string mode = j.value("mode", "theorem1");
        if (mode == "theorem1") c.mode = Mode::theorem1;
        else if (mode == "theorem2") c.mode = Mode::theorem2;
        else throw DomainError("unknown mode '" + mode + "'");
        const auto& g = j.at("grid");
        c.shape = list_of<std::size_t>(g, "shape");
        c.lo = list_of<double>(g, "lo");
        c.hi = list_of<double>(g, "hi");
        c.mass = j.value("mass", 1.0);
        c.hbar = j.value("hbar", 1.0);
        c.potential = j.at("potential");
        c.initial_state = j.value("initial_state", json::object());
        c.position_partition = j.at("position_partition");
        c.momentum_partition = j.value("momentum_partition", json());
        c.schedule = list_of<double>(j, "schedule");
        c.Q = j.at("Q").get<std::uint64_t>();
        if (j.contains("lambdas")) c.lambdas = j.at("lambdas").get<std::vector<double>>();
        c.insensitivity_lambdas = j.value("insensitivity_lambdas", c.lambdas);
        c.seed = j.value("seed", std::uint64_t{1});
        c.retries = j.value("retries", 8);
        const auto t = j.value("tolerances", json::object());
        c.tolerances.eps_coll = t.value("eps_coll", -1.0);
        c.tolerances.delta_path = t.value("delta_path", -1.0);
        c.tolerances.eps_q = t.value("eps_q", 1e-3);
        c.tolerances.edge_eps = t.value("edge_eps", 1e-6);
        c.tolerances.norm = t.value("norm", 1e-8);
        c.tolerances.energy = t.value("energy", 1e-6);
        c.propagation_step = j.value("propagation_step", 5e-3);
        const auto cl = j.value("classical", json::object());
        c.dt_divisor = cl.value("dt_divisor", 1.0);
        c.max_halvings = cl.value("max_halvings", 4);
        c.momentum_extent = j.value("momentum_extent", 0.0);
        const auto bb = j.value("blackbox", json::object());
        c.resolution_factor = bb.value("resolution_factor", 10.0);
        c.resolution = bb.value("resolution", 0.0);
        if (c.shape.size() != c.lo.size() || c.shape.size() != c.hi.size())
            throw DomainError("grid shape and bounds differ in length");
        return c;
    } catch (const json::exception& e) {
        throw DomainError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config is not valid JSON: ") + e.what(), e.byte);
    }
    return from_json(j, path.parent_path());
}

}  // namespace scratchsim::experiment
