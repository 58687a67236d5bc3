// sobolab: scenario runner for the stochastic convolution regularity lab.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "sobolab/lab.hpp"

namespace fs = std::filesystem;
using namespace sobolab;

namespace {

struct Flags {
    std::string scenario;
    std::string out;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string ensemble;
    std::string report;
};

void common(CLI::App* cmd, Flags& f, bool needsScenario = true) {
    auto* sc = cmd->add_option("--scenario", f.scenario, "scenario JSON file")->envname("SOBOLAB_SCENARIO");
    if (needsScenario) sc->required();
    cmd->add_option("--out", f.out, "output directory")->envname("SOBOLAB_OUT");
    cmd->add_option("--tol", f.tol, "quadrature tolerance override")->envname("SOBOLAB_TOL");
    cmd->add_option("--seed", f.seed, "Monte Carlo seed override")->envname("SOBOLAB_SEED");
    cmd->add_option("--threads", f.threads, "worker threads")->envname("SOBOLAB_THREADS")->check(CLI::PositiveNumber);
}

fs::path output_dir(const Flags& f, const lab::Scenario& s) {
    if (!f.out.empty()) return f.out;
    if (!s.output.empty()) return s.output;
    return fs::path("sobolab-out") / s.name;
}

void print_summary(const lab::RunReport& r, const fs::path& dir) {
    for (const auto& m : r.moments) {
        std::cout << "alpha=" << m.alpha << " theta=" << m.theta << " modes=" << m.modes;
        if (m.seminormMoment) std::cout << " seminorm=" << *m.seminormMoment;
        std::cout << " l2=" << m.l2Moment << " ratio=" << m.ratio << '\n';
    }
    for (const auto& s : r.sweeps) {
        std::cout << "sweep alpha=" << s.alpha << ": " << s.verdict;
        if (s.slope) std::cout << " (slope " << *s.slope << ")";
        std::cout << " top change " << s.sweep.topRelativeChange << '\n';
    }
    for (const auto& m : r.monteCarlo) {
        std::cout << "mc " << m.functional << " alpha=" << m.alpha << ": " << m.estimate.fine.mean << " +- "
                  << m.estimate.fine.stdError << " (oracle " << m.oracle << ", discrete " << m.discreteOracle
                  << ")\n";
    }
    for (const auto& g : r.gates) std::cout << (g.pass ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
    std::cout << (r.passed() ? "all gates pass" : "gate failure") << "; artifacts in " << dir.string() << '\n';
}

int run_stage(const Flags& f, lab::Stage stage) {
    lab::RunOptions opt;
    opt.tolerance = f.tol;
    opt.seed = f.seed;
    opt.threads = f.threads;
    if (!f.ensemble.empty()) opt.ensemble = fs::path(f.ensemble);
    const lab::Scenario s = lab::apply_overrides(lab::load_scenario(f.scenario), opt);
    const fs::path dir = output_dir(f, s);
    opt.out = dir;
    const auto result = lab::execute(s, stage, opt);
    lab::write_artifacts(result, dir, opt.threads);
    print_summary(result.report, dir);
    return result.report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moments, truncation sweeps and Monte Carlo checks for fractional time regularity"};
    app.require_subcommand(1);
    Flags f;

    auto* run = app.add_subcommand("run", "all stages: moments, sweeps, Monte Carlo and gates");
    common(run, f);
    auto* oracle = app.add_subcommand("oracle", "moments and certificates only");
    common(oracle, f);
    auto* sweep = app.add_subcommand("sweep", "moments plus truncation sweeps and verdicts");
    common(sweep, f);
    auto* sample = app.add_subcommand("sample", "sample the ensemble, write ensemble.bin and estimates");
    common(sample, f);
    auto* verify = app.add_subcommand("verify", "Monte Carlo estimates against the oracle gates");
    common(verify, f);
    verify->add_option("--ensemble", f.ensemble, "verify a stored ensemble.bin instead of resampling")
        ->check(CLI::ExistingFile);
    auto* report = app.add_subcommand("report", "re-render CSV tables from a stored report.json");
    report->add_option("--report", f.report, "report.json to render")->required()->check(CLI::ExistingFile);
    report->add_option("--out", f.out, "output directory (default: next to the report)")->envname("SOBOLAB_OUT");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*report) {
            const auto r = lab::load_report(f.report);
            const fs::path dir = f.out.empty() ? fs::path(f.report).parent_path() : fs::path(f.out);
            lab::write_artifacts(r, dir.empty() ? fs::path(".") : dir);
            print_summary(r, dir);
            return r.passed() ? 0 : 1;
        }
        if (*run) return run_stage(f, lab::Stage::Run);
        if (*oracle) return run_stage(f, lab::Stage::Oracle);
        if (*sweep) return run_stage(f, lab::Stage::Sweep);
        if (*sample) return run_stage(f, lab::Stage::Sample);
        if (*verify) return run_stage(f, lab::Stage::Verify);
    } catch (const lab::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
