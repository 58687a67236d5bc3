#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sobolab/dirichlet_frontend.hpp"
#include "sobolab/empirical_norms.hpp"
#include "sobolab/spectral_core.hpp"

namespace sobolab::lab {

/// Validation failure; the message starts with the offending field path,
/// e.g. "scenario.queries.alphas[1]: ...".
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OperatorSpec {
    enum class Kind { Explicit, Power, Dirichlet };
    Kind kind = Kind::Power;
    std::vector<double> eigenvalues;  // explicit
    double scale = 1.0;               // power
    double growth = 2.0;              // power
    double length = 1.0;              // dirichlet
};

struct DataSpec {
    enum class Kind { Explicit, Power, Profile, Csv };
    Kind kind = Kind::Power;
    std::vector<double> coefficients;  // explicit
    double amplitude = 1.0;            // power
    double decay = 1.0;                // power
    dirichlet::Profile profile = dirichlet::Profile::One;
    bool quadrature = false;           // profile: Simpson instead of closed form
    std::size_t intervals = 16384;     // profile with quadrature
    std::string csvPath;               // csv, resolved against the scenario file
};

enum class SpaceMode { Theorem, Smr };

struct QuerySpec {
    std::vector<double> alphas;
    double horizon = 1.0;
    SpaceMode space = SpaceMode::Theorem;
};

struct MonteCarloSpec {
    std::size_t paths = 10000;
    std::size_t steps = 1024;
    std::uint64_t seed = 0;
    std::optional<std::size_t> modes;
    double sigma = 3.0;
    KernelScheme kernel = KernelScheme::CellExact;
    bool dump = false;
};

struct VerdictExpectation {
    double alpha = 0.0;
    dirichlet::Verdict verdict = dirichlet::Verdict::FiniteStable;
};

struct SlopeExpectation {
    double alpha = 0.0;
    double value = 0.0;
    double relativeTolerance = 0.1;
};

struct Scenario {
    std::string name;
    OperatorSpec op;
    DataSpec data;
    std::optional<std::size_t> modes;
    QuerySpec queries;
    std::vector<std::size_t> truncations;
    double tolerance = 1e-8;
    double stabilityTolerance = 0.01;
    std::optional<MonteCarloSpec> monteCarlo;
    std::vector<VerdictExpectation> expectedVerdicts;
    std::vector<SlopeExpectation> expectedSlopes;
    std::string output;
    std::filesystem::path baseDir;  // not serialized

    /// Modes used for moments: explicit `modes`, else the largest truncation,
    /// else the length of explicit eigenvalue or coefficient lists.
    [[nodiscard]] std::size_t resolved_modes() const;
};

/// Parses and validates; unknown keys are errors.
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& baseDir = {});
Scenario load_scenario(const std::filesystem::path& file);

/// Every field with defaults filled in, excluding the output directory.
/// parse_scenario(normalized(s)) reproduces s.
nlohmann::ordered_json normalized(const Scenario& s);

/// Operator and data at `modes` modes, with explicit lists sorted jointly by eigenvalue.
struct Problem {
    SpectralOperator op;
    SpectralVector x;
    std::optional<PowerFamily> family;
};

Problem build_problem(const Scenario& s, std::size_t modes);

}  // namespace sobolab::lab
