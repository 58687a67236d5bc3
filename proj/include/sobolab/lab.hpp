#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sobolab/empirical_norms.hpp"
#include "sobolab/moment_oracle.hpp"
#include "sobolab/path_sampler.hpp"
#include "sobolab/scenario.hpp"

namespace sobolab::lab {

inline constexpr const char* kReportSchema = "sobolab.report/1";
inline constexpr const char* kVersion = "0.1.0";

/// Which parts of a scenario to execute. Every subcommand is a restriction of Run.
enum class Stage { Oracle, Sweep, Sample, Verify, Run };

const char* to_string(Stage s) noexcept;

struct RunOptions {
    std::optional<double> tolerance;  ///< overrides scenario.tolerance
    std::optional<std::uint64_t> seed;  ///< overrides monte_carlo.seed
    unsigned threads = 1;
    std::filesystem::path out;  ///< empty: scenario.output, else "sobolab-out"
    std::optional<std::filesystem::path> ensemble;  ///< verify against a stored ensemble
};

/// One row of moments.csv.
struct MomentRow {
    double alpha = 0.0;
    double theta = 0.5;
    std::size_t modes = 0;
    /// |A^{alpha + theta - 1/2} x|, the norm the moment is equivalent to.
    double referenceNorm = 0.0;
    std::optional<double> seminormMoment;  // absent at alpha = 0
    double l2Moment = 0.0;
    double ratio = 0.0;  ///< sqrt(seminorm + L^2 moment) / referenceNorm
    std::optional<CertificateReport> certificate;
    std::optional<Membership> membership;
};

struct SweepRow {
    double alpha = 0.0;
    TruncationSweep sweep;
    std::string verdict;
    std::optional<double> slope;
};

struct McRow {
    double alpha = 0.0;
    double theta = 0.5;
    std::string functional;  ///< "seminorm" or "l2"
    std::size_t steps = 0;
    std::size_t paths = 0;
    RefinedEstimate estimate;
    double oracle = 0.0;          ///< continuum moment
    double discreteOracle = 0.0;  ///< exact expectation of the estimator on this grid
    std::optional<GateResult> gate;          ///< vs oracle with the measured bias
    std::optional<GateResult> discreteGate;  ///< vs discreteOracle, no bias term
};

struct GateRecord {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunReport {
    std::string schema = kReportSchema;
    std::string version = kVersion;
    std::string stage;
    nlohmann::ordered_json scenario;  ///< normalized echo with overrides applied
    double tolerance = 0.0;
    std::vector<MomentRow> moments;
    std::vector<SweepRow> sweeps;
    std::vector<McRow> monteCarlo;
    std::optional<std::string> factorMethod;
    std::vector<GateRecord> gates;

    [[nodiscard]] bool passed() const;
};

nlohmann::ordered_json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::ordered_json& j);
RunReport load_report(const std::filesystem::path& file);

/// Scenario with command-line overrides folded in.
Scenario apply_overrides(Scenario s, const RunOptions& opt);

struct RunResult {
    RunReport report;
    /// Kept when the stage is Sample or the scenario asks for a dump.
    std::optional<PathEnsemble> ensemble;
    /// Wall-clock seconds per stage; written to timing.json, never into the report.
    std::vector<std::pair<std::string, double>> timing;
};

/// Runs the requested stage in memory.
RunResult execute(const Scenario& s, Stage stage, const RunOptions& opt);

/// report.json, moments.csv, sweep.csv and mc.csv (each only when it has rows).
void write_artifacts(const RunReport& r, const std::filesystem::path& dir);
/// The above plus ensemble.bin and timing.json.
void write_artifacts(const RunResult& r, const std::filesystem::path& dir, unsigned threads);

/// CSV renderings, exposed for tests.
std::string moments_csv(const RunReport& r);
std::string sweep_csv(const RunReport& r);
std::string mc_csv(const RunReport& r);

}  // namespace sobolab::lab
