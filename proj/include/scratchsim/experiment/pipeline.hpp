#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "scratchsim/classical/ensemble.hpp"
#include "scratchsim/experiment/config.hpp"
#include "scratchsim/quantum/insensitivity.hpp"

namespace scratchsim::experiment {

/// 1 / (N Q^{1/(groups n)}) in extended precision.
long double discrimination_bound(std::uint64_t N, std::uint64_t Q, int groups, int n);

/// Divides every row by its sum. `gaps[j]` receives sum - 1 before the division.
std::vector<std::vector<double>> renormalize(const std::vector<std::vector<double>>& rows, std::vector<double>& gaps);

struct ClassicalRun {
    double lambda = 0.0;
    double dt = 0.0;
    int halvings = 0;
    double max_energy_drift = 0.0;
    double max_deviation = 0.0;
    double min_pair_distance = 0.0;
    std::size_t steps = 0;
    classical::OccupancyRecord occupancy;
    /// max_k |P_k(t_j) - pi_k(t_j)| per checkpoint, in long double.
    std::vector<long double> position_gap, momentum_gap;
    bool position_ok = false;
    bool momentum_ok = false;
    bool sums_ok = false;
};

struct DiscriminationReport {
    Mode mode = Mode::theorem1;
    int n = 0;
    int K = 0;
    /// Groups handed to the lemma: 2 (Theorem 1), 2K, or K without momenta.
    int groups = 0;
    std::uint64_t N = 0;
    std::uint64_t Q = 0;
    long double bound = 0;
    std::vector<double> times;
    /// Renormalised quantum tables [j][k].
    std::vector<std::vector<double>> P, P_tilde;
    std::vector<ClassicalRun> runs;
    quantum::InsensitivityTable insensitivity;
    /// Named pass/fail verdicts; passed() is their conjunction.
    std::map<std::string, bool> criteria;
    nlohmann::json data;
    /// Raw artifacts by file name.
    std::map<std::string, std::string> files;

    bool passed() const;
    /// The run at the largest lambda.
    const ClassicalRun& final_run() const { return runs.back(); }
    /// report.json content: `data` with the criteria merged in, two-space
    /// indented, trailing newline.
    std::string json_text() const;
};

DiscriminationReport run_theorem1(const ExperimentConfig& config);
DiscriminationReport run_theorem2(const ExperimentConfig& config);

/// Instrument records: both tables rounded to multiples of `resolution`.
/// Indistinguishable when the raw gap is below the resolution; the records
/// themselves may still differ by one unit where a rounding midpoint falls
/// between the two values.
nlohmann::json measurement_records(const DiscriminationReport& report, double resolution);

/// A Theorem-2 run followed by the instrument comparison.
DiscriminationReport run_blackbox(const ExperimentConfig& config);

DiscriminationReport run(const ExperimentConfig& config);

/// Writes report.json and every artifact into `dir`, creating it.
void write_report(const DiscriminationReport& report, const std::filesystem::path& dir);

}  // namespace scratchsim::experiment
