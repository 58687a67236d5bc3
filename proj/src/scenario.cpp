#include "sobolab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace sobolab::lab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ScenarioError(path + ": " + what); }

// Tracks which keys of an object were consumed so leftovers can be rejected.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }
    [[nodiscard]] std::string at(const std::string& key) const { return path_ + "." + key; }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) fail(at(key), "missing required field");
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key) {
        const json& v = raw(key);
        try {
            return v.get<T>();
        } catch (const json::exception& e) {
            fail(at(key), std::string("wrong type (") + e.what() + ")");
        }
    }

    template <class T>
    T get_or(const std::string& key, T fallback) {
        return has(key) ? get<T>(key) : fallback;
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) fail(at(item.key()), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double finite_positive(double v, const std::string& path) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be a positive finite number");
    return v;
}

OperatorSpec parse_operator(const json& j, const std::string& path) {
    Fields f(j, path);
    OperatorSpec op;
    const auto kind = f.get<std::string>("kind");
    if (kind == "explicit") {
        op.kind = OperatorSpec::Kind::Explicit;
        op.eigenvalues = f.get<std::vector<double>>("eigenvalues");
        if (op.eigenvalues.empty()) fail(f.at("eigenvalues"), "must not be empty");
        for (std::size_t i = 0; i < op.eigenvalues.size(); ++i) {
            finite_positive(op.eigenvalues[i], f.at("eigenvalues") + "[" + std::to_string(i) + "]");
        }
    } else if (kind == "power") {
        op.kind = OperatorSpec::Kind::Power;
        op.scale = finite_positive(f.get_or("scale", 1.0), f.at("scale"));
        op.growth = finite_positive(f.get_or("growth", 2.0), f.at("growth"));
    } else if (kind == "dirichlet") {
        op.kind = OperatorSpec::Kind::Dirichlet;
        op.length = finite_positive(f.get_or("length", 1.0), f.at("length"));
    } else {
        fail(f.at("kind"), "expected explicit, power or dirichlet");
    }
    f.finish();
    return op;
}

DataSpec parse_data(const json& j, const std::string& path) {
    Fields f(j, path);
    DataSpec d;
    const auto kind = f.get<std::string>("kind");
    if (kind == "explicit") {
        d.kind = DataSpec::Kind::Explicit;
        d.coefficients = f.get<std::vector<double>>("coefficients");
        for (std::size_t i = 0; i < d.coefficients.size(); ++i) {
            if (!std::isfinite(d.coefficients[i])) {
                fail(f.at("coefficients") + "[" + std::to_string(i) + "]", "must be finite");
            }
        }
    } else if (kind == "power") {
        d.kind = DataSpec::Kind::Power;
        d.amplitude = finite_positive(f.get_or("amplitude", 1.0), f.at("amplitude"));
        d.decay = f.get_or("decay", 1.0);
        if (!(d.decay >= 0.0) || !std::isfinite(d.decay)) fail(f.at("decay"), "must be a nonnegative number");
    } else if (kind == "profile") {
        d.kind = DataSpec::Kind::Profile;
        try {
            d.profile = dirichlet::profile_from_string(f.get<std::string>("profile"));
        } catch (const std::invalid_argument& e) {
            fail(f.at("profile"), e.what());
        }
        const auto method = f.get_or<std::string>("method", "closed-form");
        if (method == "quadrature") {
            d.quadrature = true;
        } else if (method != "closed-form") {
            fail(f.at("method"), "expected closed-form or quadrature");
        }
        d.intervals = f.get_or<std::size_t>("intervals", 16384);
        if (d.intervals < 8 || d.intervals % 2 != 0) fail(f.at("intervals"), "must be an even number >= 8");
    } else if (kind == "csv") {
        d.kind = DataSpec::Kind::Csv;
        d.csvPath = f.get<std::string>("path");
    } else {
        fail(f.at("kind"), "expected explicit, power, profile or csv");
    }
    f.finish();
    return d;
}

QuerySpec parse_queries(const json& j, const std::string& path) {
    Fields f(j, path);
    QuerySpec q;
    q.alphas = f.get<std::vector<double>>("alphas");
    if (q.alphas.empty()) fail(f.at("alphas"), "must not be empty");
    for (std::size_t i = 0; i < q.alphas.size(); ++i) {
        if (!(q.alphas[i] >= 0.0 && q.alphas[i] < 0.5)) {
            fail(f.at("alphas") + "[" + std::to_string(i) + "]", "must lie in [0, 1/2)");
        }
    }
    q.horizon = finite_positive(f.get_or("horizon", 1.0), f.at("horizon"));
    const auto space = f.get_or<std::string>("space", "theorem");
    if (space == "theorem") {
        q.space = SpaceMode::Theorem;
    } else if (space == "smr") {
        q.space = SpaceMode::Smr;
    } else {
        fail(f.at("space"), "expected theorem or smr");
    }
    f.finish();
    return q;
}

MonteCarloSpec parse_monte_carlo(const json& j, const std::string& path) {
    Fields f(j, path);
    MonteCarloSpec mc;
    mc.paths = f.get_or<std::size_t>("paths", 10000);
    if (mc.paths < 2) fail(f.at("paths"), "need at least two paths for a standard error");
    mc.steps = f.get_or<std::size_t>("steps", 1024);
    if (mc.steps < 4 || mc.steps % 2 != 0) fail(f.at("steps"), "must be an even number >= 4");
    if (!f.has("seed")) fail(f.at("seed"), "a seed is required whenever a monte_carlo block is present");
    mc.seed = f.get<std::uint64_t>("seed");
    if (f.has("modes")) {
        mc.modes = f.get<std::size_t>("modes");
        if (*mc.modes == 0) fail(f.at("modes"), "must be positive");
    }
    mc.sigma = finite_positive(f.get_or("sigma", 3.0), f.at("sigma"));
    try {
        mc.kernel = kernel_scheme_from_string(f.get_or<std::string>("kernel", "cell-exact"));
    } catch (const std::invalid_argument& e) {
        fail(f.at("kernel"), e.what());
    }
    mc.dump = f.get_or("dump", false);
    f.finish();
    return mc;
}

bool alpha_listed(const std::vector<double>& alphas, double alpha) {
    return std::find(alphas.begin(), alphas.end(), alpha) != alphas.end();
}

void parse_expectations(const json& j, const std::string& path, Scenario& s) {
    Fields f(j, path);
    if (f.has("verdicts")) {
        const json& list = f.raw("verdicts");
        if (!list.is_array()) fail(f.at("verdicts"), "expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string p = f.at("verdicts") + "[" + std::to_string(i) + "]";
            Fields e(list[i], p);
            VerdictExpectation v;
            v.alpha = e.get<double>("alpha");
            const auto name = e.get<std::string>("verdict");
            if (name == "finite-stable") {
                v.verdict = dirichlet::Verdict::FiniteStable;
            } else if (name == "diverging") {
                v.verdict = dirichlet::Verdict::Diverging;
            } else {
                fail(e.at("verdict"), "expected finite-stable or diverging");
            }
            e.finish();
            if (!alpha_listed(s.queries.alphas, v.alpha)) fail(e.at("alpha"), "not among queries.alphas");
            s.expectedVerdicts.push_back(v);
        }
    }
    if (f.has("slopes")) {
        const json& list = f.raw("slopes");
        if (!list.is_array()) fail(f.at("slopes"), "expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string p = f.at("slopes") + "[" + std::to_string(i) + "]";
            Fields e(list[i], p);
            SlopeExpectation v;
            v.alpha = e.get<double>("alpha");
            v.value = e.get<double>("value");
            v.relativeTolerance = finite_positive(e.get_or("relative_tolerance", 0.1), e.at("relative_tolerance"));
            e.finish();
            if (!alpha_listed(s.queries.alphas, v.alpha)) fail(e.at("alpha"), "not among queries.alphas");
            s.expectedSlopes.push_back(v);
        }
    }
    f.finish();
}

const char* kind_name(OperatorSpec::Kind k) {
    switch (k) {
        case OperatorSpec::Kind::Explicit: return "explicit";
        case OperatorSpec::Kind::Power: return "power";
        case OperatorSpec::Kind::Dirichlet: return "dirichlet";
    }
    return "";
}

}  // namespace

std::size_t Scenario::resolved_modes() const {
    if (modes) return *modes;
    if (!truncations.empty()) return truncations.back();
    if (op.kind == OperatorSpec::Kind::Explicit) return op.eigenvalues.size();
    if (data.kind == DataSpec::Kind::Explicit) return data.coefficients.size();
    throw ScenarioError("scenario.modes: required when neither truncations nor explicit lists fix the size");
}

Scenario parse_scenario(const json& j, const std::filesystem::path& baseDir) {
    Fields f(j, "scenario");
    Scenario s;
    s.baseDir = baseDir;
    s.name = f.get_or<std::string>("name", "unnamed");
    s.op = parse_operator(f.raw("operator"), f.at("operator"));
    s.data = parse_data(f.raw("data"), f.at("data"));
    s.queries = parse_queries(f.raw("queries"), f.at("queries"));
    if (f.has("modes")) {
        s.modes = f.get<std::size_t>("modes");
        if (*s.modes == 0) fail(f.at("modes"), "must be positive");
    }
    s.truncations = f.get_or<std::vector<std::size_t>>("truncations", {});
    for (std::size_t i = 0; i < s.truncations.size(); ++i) {
        if (s.truncations[i] == 0 || (i > 0 && s.truncations[i] <= s.truncations[i - 1])) {
            fail(f.at("truncations") + "[" + std::to_string(i) + "]", "must be positive and strictly increasing");
        }
    }
    s.tolerance = finite_positive(f.get_or("tolerance", 1e-8), f.at("tolerance"));
    s.stabilityTolerance = finite_positive(f.get_or("stability_tolerance", 0.01), f.at("stability_tolerance"));
    if (f.has("monte_carlo")) s.monteCarlo = parse_monte_carlo(f.raw("monte_carlo"), f.at("monte_carlo"));
    if (f.has("expect")) parse_expectations(f.raw("expect"), f.at("expect"), s);
    s.output = f.get_or<std::string>("output", "");
    f.finish();

    const bool boundary_data = s.data.kind == DataSpec::Kind::Profile || s.data.kind == DataSpec::Kind::Csv;
    if (boundary_data && s.op.kind != OperatorSpec::Kind::Dirichlet) {
        fail("scenario.data.kind", "profile and csv data need a dirichlet operator");
    }
    const std::size_t modes = s.resolved_modes();
    if (!s.truncations.empty() && s.truncations.back() > modes) {
        fail("scenario.truncations", "largest truncation exceeds scenario.modes");
    }
    if (s.op.kind == OperatorSpec::Kind::Explicit && modes > s.op.eigenvalues.size()) {
        fail("scenario.operator.eigenvalues", "fewer eigenvalues than required modes");
    }
    if (s.data.kind == DataSpec::Kind::Explicit) {
        if (s.op.kind == OperatorSpec::Kind::Explicit && s.data.coefficients.size() != s.op.eigenvalues.size()) {
            fail("scenario.data.coefficients", "length must match operator.eigenvalues");
        }
        if (s.data.coefficients.size() < modes) fail("scenario.data.coefficients", "fewer coefficients than modes");
    }
    if (s.data.kind == DataSpec::Kind::Profile && s.data.quadrature && modes > s.data.intervals / 2) {
        fail("scenario.data.intervals", "resolution guard: need at least two intervals per mode");
    }
    if (s.monteCarlo && s.monteCarlo->modes && *s.monteCarlo->modes > modes) {
        fail("scenario.monte_carlo.modes", "exceeds scenario.modes");
    }
    if ((!s.expectedVerdicts.empty() || !s.expectedSlopes.empty()) && s.truncations.size() < 3) {
        fail("scenario.expect", "verdict and slope expectations need at least three truncations");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ScenarioError(file.string() + ": cannot open scenario");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError(file.string() + ": " + e.what());
    }
    return parse_scenario(j, file.parent_path());
}

ordered_json normalized(const Scenario& s) {
    ordered_json j;
    j["name"] = s.name;
    ordered_json op;
    op["kind"] = kind_name(s.op.kind);
    switch (s.op.kind) {
        case OperatorSpec::Kind::Explicit: op["eigenvalues"] = s.op.eigenvalues; break;
        case OperatorSpec::Kind::Power:
            op["scale"] = s.op.scale;
            op["growth"] = s.op.growth;
            break;
        case OperatorSpec::Kind::Dirichlet: op["length"] = s.op.length; break;
    }
    j["operator"] = op;

    ordered_json data;
    switch (s.data.kind) {
        case DataSpec::Kind::Explicit:
            data["kind"] = "explicit";
            data["coefficients"] = s.data.coefficients;
            break;
        case DataSpec::Kind::Power:
            data["kind"] = "power";
            data["amplitude"] = s.data.amplitude;
            data["decay"] = s.data.decay;
            break;
        case DataSpec::Kind::Profile:
            data["kind"] = "profile";
            data["profile"] = dirichlet::to_string(s.data.profile);
            data["method"] = s.data.quadrature ? "quadrature" : "closed-form";
            data["intervals"] = s.data.intervals;
            break;
        case DataSpec::Kind::Csv:
            data["kind"] = "csv";
            // Anchored to the scenario directory so the echo re-runs from anywhere.
            data["path"] = (std::filesystem::path(s.data.csvPath).is_relative() && !s.baseDir.empty())
                               ? (s.baseDir / s.data.csvPath).lexically_normal().string()
                               : s.data.csvPath;
            break;
    }
    j["data"] = data;
    j["modes"] = s.resolved_modes();
    j["queries"] = {{"alphas", s.queries.alphas},
                    {"horizon", s.queries.horizon},
                    {"space", s.queries.space == SpaceMode::Theorem ? "theorem" : "smr"}};
    j["truncations"] = s.truncations;
    j["tolerance"] = s.tolerance;
    j["stability_tolerance"] = s.stabilityTolerance;
    if (s.monteCarlo) {
        const auto& mc = *s.monteCarlo;
        ordered_json m;
        m["paths"] = mc.paths;
        m["steps"] = mc.steps;
        m["seed"] = mc.seed;
        m["modes"] = mc.modes.value_or(s.resolved_modes());
        m["sigma"] = mc.sigma;
        m["kernel"] = to_string(mc.kernel);
        m["dump"] = mc.dump;
        j["monte_carlo"] = m;
    }
    if (!s.expectedVerdicts.empty() || !s.expectedSlopes.empty()) {
        ordered_json e;
        if (!s.expectedVerdicts.empty()) {
            e["verdicts"] = ordered_json::array();
            for (const auto& v : s.expectedVerdicts) {
                e["verdicts"].push_back({{"alpha", v.alpha}, {"verdict", dirichlet::to_string(v.verdict)}});
            }
        }
        if (!s.expectedSlopes.empty()) {
            e["slopes"] = ordered_json::array();
            for (const auto& v : s.expectedSlopes) {
                e["slopes"].push_back(
                    {{"alpha", v.alpha}, {"value", v.value}, {"relative_tolerance", v.relativeTolerance}});
            }
        }
        j["expect"] = e;
    }
    return j;
}

Problem build_problem(const Scenario& s, std::size_t modes) {
    if (modes == 0) throw ScenarioError("scenario.modes: must be positive");
    std::vector<double> ev;
    std::vector<double> coeff;

    switch (s.op.kind) {
        case OperatorSpec::Kind::Explicit: {
            const auto& raw = s.op.eigenvalues;
            std::vector<std::size_t> order(raw.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
            for (std::size_t i = 0; i < modes; ++i) ev.push_back(raw[order[i]]);
            if (s.data.kind == DataSpec::Kind::Explicit) {
                for (std::size_t i = 0; i < modes; ++i) coeff.push_back(s.data.coefficients[order[i]]);
            }
            break;
        }
        case OperatorSpec::Kind::Power: {
            const PowerFamily fam{1.0, 0.0, s.op.scale, s.op.growth};
            const auto op = fam.make_operator(modes);
            ev.assign(op.eigenvalues().begin(), op.eigenvalues().end());
            break;
        }
        case OperatorSpec::Kind::Dirichlet: {
            const auto op = dirichlet::dirichlet_operator({s.op.length}, modes);
            ev.assign(op.eigenvalues().begin(), op.eigenvalues().end());
            break;
        }
    }

    std::optional<PowerFamily> family;
    const dirichlet::IntervalDomain domain{s.op.length};
    switch (s.data.kind) {
        case DataSpec::Kind::Explicit:
            if (coeff.empty()) coeff.assign(s.data.coefficients.begin(), s.data.coefficients.begin() + modes);
            break;
        case DataSpec::Kind::Power: {
            const PowerFamily fam{s.data.amplitude, s.data.decay, s.op.scale, s.op.growth};
            const auto x = fam.make_vector(modes);
            coeff.assign(x.coefficients().begin(), x.coefficients().end());
            if (s.op.kind == OperatorSpec::Kind::Power) family = fam;
            break;
        }
        case DataSpec::Kind::Profile: {
            const auto x = s.data.quadrature
                               ? dirichlet::sine_coefficients(
                                     dirichlet::sample_profile(s.data.profile, domain, s.data.intervals), domain, modes)
                               : dirichlet::profile_coefficients(s.data.profile, domain, modes);
            coeff.assign(x.coefficients().begin(), x.coefficients().end());
            break;
        }
        case DataSpec::Kind::Csv: {
            const auto file = std::filesystem::path(s.data.csvPath).is_absolute() ? std::filesystem::path(s.data.csvPath)
                                                                                  : s.baseDir / s.data.csvPath;
            const auto h = dirichlet::read_profile_csv(file, domain);
            const auto x = dirichlet::sine_coefficients(h, domain, modes);
            coeff.assign(x.coefficients().begin(), x.coefficients().end());
            break;
        }
    }
    return Problem{SpectralOperator(std::move(ev)), SpectralVector(std::move(coeff)), family};
}

}  // namespace sobolab::lab
