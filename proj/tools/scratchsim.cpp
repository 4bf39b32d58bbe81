#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "scratchsim/acceptance/suite.hpp"
#include "scratchsim/diophantine/approximation.hpp"
#include "scratchsim/error.hpp"
#include "scratchsim/experiment/pipeline.hpp"

namespace fs = std::filesystem;
using namespace scratchsim;

namespace {

int report_and_exit(const experiment::DiscriminationReport& rep, const fs::path& out) {
    experiment::write_report(rep, out);
    for (const auto& [name, ok] : rep.criteria) std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    std::cout << "N = " << rep.N << ", bound = " << static_cast<double>(rep.bound) << ", report in " << out.string()
              << '\n';
    return rep.passed() ? 0 : 1;
}

int diophantine_command(const fs::path& in, const fs::path& out) {
    std::ifstream f(in);
    if (!f) throw DomainError("cannot open " + in.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("problem is not valid JSON: ") + e.what(), e.byte);
    }
    const auto problem = diophantine::problem_from_json(j);
    const auto approx = diophantine::solve(problem);
    const auto cert = diophantine::verify(problem, approx);
    const std::string text = diophantine::to_json(approx, cert).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        std::ofstream(out) << text;
    }
    return cert.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical ensembles on scratched potentials that reproduce quantum occupation statistics"};
    app.require_subcommand(1);

    fs::path config, out = "out";
    auto add_pipeline = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config,-c", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out, "Output directory")->capture_default_str();
        return sub;
    };
    auto* t1 = add_pipeline("theorem1", "Two-checkpoint position pipeline on straight scratches");
    auto* t2 = add_pipeline("theorem2", "Multi-checkpoint position and momentum pipeline in 3-D");
    auto* bb = add_pipeline("blackbox", "Theorem-2 run followed by the instrument comparison");

    fs::path problem, certificate;
    auto* dio = app.add_subcommand("diophantine", "Constrained simultaneous rational approximation");
    dio->add_option("--problem,-p", problem, "Problem JSON {alphas, constraints, Q}")
        ->required()
        ->check(CLI::ExistingFile);
    dio->add_option("--out,-o", certificate, "Certificate JSON (stdout when omitted)");

    acceptance::SuiteOptions vopt;
    vopt.config_dir = SCRATCHSIM_CONFIG_DIR;
    std::vector<int> only;
    auto* ver = app.add_subcommand("verify", "Run the acceptance property suite");
    ver->add_option("--configs", vopt.config_dir, "Directory holding theorem1.json and theorem2.json")
        ->capture_default_str();
    ver->add_option("--only", only, "Run only these criteria (1-8)");
    ver->add_option("--out,-o", vopt.out_dir, "Write a JSON summary and pipeline reports here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*t1 || *t2 || *bb) {
            const auto cfg = experiment::ExperimentConfig::load(config);
            if (*t1) return report_and_exit(experiment::run_theorem1(cfg), out);
            if (*t2) return report_and_exit(experiment::run_theorem2(cfg), out);
            return report_and_exit(experiment::run_blackbox(cfg), out);
        }
        if (*dio) return diophantine_command(problem, certificate);
        if (*ver) {
            vopt.only = only;
            const auto results = acceptance::run_suite(vopt, std::cout);
            return acceptance::all_passed(results) ? 0 : 1;
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
