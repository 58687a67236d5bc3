#include "sobolab/lab.hpp"

#include <Eigen/Core>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sobolab/ensemble_io.hpp"
#include "sobolab/reduction.hpp"

namespace sobolab::lab {

using nlohmann::ordered_json;

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double theta_for(const Scenario& s, double alpha) {
    return s.queries.space == SpaceMode::Theorem ? 0.5 : 0.5 - alpha;
}

template <class T>
ordered_json opt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <class T>
std::optional<T> opt_from(const ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

double number(const ordered_json& j, const char* key) {
    // NaN and infinities are stored as null.
    const auto& v = j.at(key);
    return v.is_null() ? std::nan("") : v.get<double>();
}

ordered_json estimate_json(const SeminormEstimate& e) {
    return {{"mean", e.mean}, {"std_error", e.stdError}, {"paths", e.nPaths}};
}

SeminormEstimate estimate_from(const ordered_json& j) {
    SeminormEstimate e;
    e.mean = number(j, "mean");
    e.stdError = number(j, "std_error");
    e.nPaths = j.at("paths").get<std::size_t>();
    return e;
}

ordered_json gate_json(const std::optional<GateResult>& g) {
    if (!g) return nullptr;
    return {{"pass", g->pass}, {"deviation", g->deviation}, {"allowance", g->allowance}};
}

std::optional<GateResult> gate_from(const ordered_json& j) {
    if (j.is_null()) return std::nullopt;
    GateResult g;
    g.pass = j.at("pass").get<bool>();
    g.deviation = number(j, "deviation");
    g.allowance = number(j, "allowance");
    return g;
}

ordered_json certificate_json(const CertificateReport& c) {
    ordered_json j;
    j["truncation"] = c.truncation;
    j["alpha"] = c.alpha;
    j["horizon"] = c.horizon;
    j["seminorm_moment"] = c.seminormMoment;
    j["l2_moment"] = c.l2Moment;
    j["frac_norm"] = c.fracNorm;
    j["x_norm"] = c.xNorm;
    j["c_alpha"] = c.cAlpha;
    j["K_alpha"] = c.KAlpha;
    j["theta_alpha_T"] = c.thetaAlphaT;
    j["C_delta_T"] = c.CdeltaT;
    j["epsilon"] = c.epsilon;
    j["seminorm_lower_rhs"] = c.seminormLowerRHS;
    j["l2_lower_rhs"] = c.l2LowerRHS;
    j["lower_bound_rhs"] = c.lowerBoundRHS;
    j["upper_bound_rhs"] = c.upperBoundRHS;
    j["seminorm_lower_holds"] = c.seminormLowerHolds;
    j["l2_lower_holds"] = c.l2LowerHolds;
    j["lower_bound_holds"] = c.lowerBoundHolds;
    j["upper_bound_holds"] = c.upperBoundHolds;
    j["quadrature_tolerance"] = c.quadratureTolerance;
    return j;
}

CertificateReport certificate_from(const ordered_json& j) {
    CertificateReport c;
    c.truncation = j.at("truncation").get<std::size_t>();
    c.alpha = number(j, "alpha");
    c.horizon = number(j, "horizon");
    c.seminormMoment = number(j, "seminorm_moment");
    c.l2Moment = number(j, "l2_moment");
    c.fracNorm = number(j, "frac_norm");
    c.xNorm = number(j, "x_norm");
    c.cAlpha = number(j, "c_alpha");
    c.KAlpha = number(j, "K_alpha");
    c.thetaAlphaT = number(j, "theta_alpha_T");
    c.CdeltaT = number(j, "C_delta_T");
    c.epsilon = number(j, "epsilon");
    c.seminormLowerRHS = number(j, "seminorm_lower_rhs");
    c.l2LowerRHS = number(j, "l2_lower_rhs");
    c.lowerBoundRHS = number(j, "lower_bound_rhs");
    c.upperBoundRHS = number(j, "upper_bound_rhs");
    c.seminormLowerHolds = j.at("seminorm_lower_holds").get<bool>();
    c.l2LowerHolds = j.at("l2_lower_holds").get<bool>();
    c.lowerBoundHolds = j.at("lower_bound_holds").get<bool>();
    c.upperBoundHolds = j.at("upper_bound_holds").get<bool>();
    c.quadratureTolerance = number(j, "quadrature_tolerance");
    return c;
}

const SweepRow* find_sweep(const RunReport& r, double alpha) {
    for (const auto& row : r.sweeps) {
        if (row.alpha == alpha) return &row;
    }
    return nullptr;
}

class Stopwatch {
public:
    explicit Stopwatch(std::vector<std::pair<std::string, double>>& sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
        sink_.emplace_back(name_, d.count());
    }
    Stopwatch(const Stopwatch&) = delete;
    Stopwatch& operator=(const Stopwatch&) = delete;

private:
    std::vector<std::pair<std::string, double>>& sink_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

// L^2 functionals on the fine grid and its every-second-point subgrid.
void l2_pair(std::span<const double> path, std::size_t modes, double dt, std::span<const double> sw, double& fine,
             double& coarse) {
    fine = discrete_l2(path, modes, dt, sw);
    const auto half = coarsen_path(path, modes);
    coarse = discrete_l2(half, modes, 2.0 * dt, sw);
}

PathFunctionals l2_only(const PathSampler& sampler, const std::optional<PathEnsemble>& ens, std::size_t nPaths,
                        const SpectralOperator& op, double theta, unsigned threads) {
    PathFunctionals f;
    f.l2Fine.resize(nPaths);
    f.l2Coarse.resize(nPaths);
    const auto sw = space_weights(op, theta);
    const double dt = sampler.grid().dt();
    const std::size_t modes = sampler.modes();
    const std::size_t stride = sampler.grid().points() * modes;
    parallel_for(nPaths, threads, [&](std::size_t p) {
        if (ens) {
            l2_pair(ens->path(p), modes, dt, sw, f.l2Fine[p], f.l2Coarse[p]);
        } else {
            thread_local std::vector<double> buffer;
            buffer.resize(stride);
            sampler.sample(p, buffer);
            l2_pair(buffer, modes, dt, sw, f.l2Fine[p], f.l2Coarse[p]);
        }
    });
    return f;
}

}  // namespace

const char* to_string(Stage s) noexcept {
    switch (s) {
        case Stage::Oracle: return "oracle";
        case Stage::Sweep: return "sweep";
        case Stage::Sample: return "sample";
        case Stage::Verify: return "verify";
        case Stage::Run: return "run";
    }
    return "unknown";
}

bool RunReport::passed() const {
    for (const auto& g : gates) {
        if (!g.pass) return false;
    }
    return true;
}

Scenario apply_overrides(Scenario s, const RunOptions& opt) {
    if (opt.tolerance) {
        if (!(*opt.tolerance > 0.0)) throw ScenarioError("--tol: must be positive");
        s.tolerance = *opt.tolerance;
    }
    if (opt.seed && s.monteCarlo) s.monteCarlo->seed = *opt.seed;
    return s;
}

RunResult execute(const Scenario& s, Stage stage, const RunOptions& opt) {
    RunResult result;
    RunReport& r = result.report;
    r.stage = to_string(stage);
    r.scenario = normalized(s);
    r.tolerance = s.tolerance;

    const bool wantMoments = stage == Stage::Oracle || stage == Stage::Sweep || stage == Stage::Run;
    const bool wantSweeps = (stage == Stage::Sweep || stage == Stage::Run) && !s.truncations.empty();
    const bool wantMc = stage == Stage::Sample || stage == Stage::Verify || (stage == Stage::Run && s.monteCarlo);
    const bool gateMc = stage == Stage::Verify || stage == Stage::Run;
    if (wantMc && !s.monteCarlo) {
        throw ScenarioError(std::string("scenario.monte_carlo: required by '") + to_string(stage) + "'");
    }

    const double T = s.queries.horizon;
    const double tol = s.tolerance;
    const unsigned threads = opt.threads == 0 ? 1 : opt.threads;

    std::optional<Problem> full;
    if (wantMoments || wantSweeps) full = build_problem(s, s.resolved_modes());

    if (wantMoments) {
        Stopwatch sw(result.timing, "moments");
        const Problem& pb = *full;
        for (double alpha : s.queries.alphas) {
            MomentRow row;
            row.alpha = alpha;
            row.theta = theta_for(s, alpha);
            row.modes = pb.op.size();
            row.referenceNorm = fractional_norm(pb.op, pb.x, alpha + row.theta - 0.5);
            row.l2Moment = l2_second_moment(pb.op, pb.x, T, row.theta);
            if (alpha > 0.0) {
                if (s.queries.space == SpaceMode::Theorem) {
                    const auto cert = certificate(pb.op, pb.x, RegularityQuery{alpha, T, 0.5}, tol, threads);
                    row.seminormMoment = cert.seminormMoment;
                    row.l2Moment = cert.l2Moment;
                    row.certificate = cert;
                    r.gates.push_back({"certificate alpha=" + short_num(alpha), cert.allHold(),
                                       "seminorm " + num(cert.seminormMoment) + " >= " + num(cert.seminormLowerRHS) +
                                           ", full " + num(cert.fullMoment()) + " in [" + num(cert.lowerBoundRHS) +
                                           ", " + num(cert.upperBoundRHS) + "]"});
                } else {
                    row.seminormMoment =
                        seminorm_second_moment(pb.op, pb.x, RegularityQuery{alpha, T, row.theta}, tol, threads);
                }
            }
            const double full_moment = row.seminormMoment.value_or(0.0) + row.l2Moment;
            row.ratio = row.referenceNorm > 0.0 ? std::sqrt(full_moment) / row.referenceNorm : 0.0;
            if (pb.family && s.queries.space == SpaceMode::Theorem) {
                row.membership = classify_power_family(*pb.family, alpha);
            }
            r.moments.push_back(std::move(row));
        }
    }

    if (wantSweeps) {
        Stopwatch sw(result.timing, "sweeps");
        const Problem& pb = *full;
        for (double alpha : s.queries.alphas) {
            if (alpha == 0.0) continue;
            const RegularityQuery q{alpha, T, theta_for(s, alpha)};
            const auto terms = seminorm_mode_contributions(pb.op, pb.x, q, tol, threads);
            SweepRow row;
            row.alpha = alpha;
            row.sweep = truncation_sweep(terms, s.truncations);
            const auto verdict = dirichlet::classify_sweep(row.sweep, s.stabilityTolerance);
            row.verdict = dirichlet::to_string(verdict);
            if (verdict == dirichlet::Verdict::Diverging) row.slope = row.sweep.incrementSlope;
            r.sweeps.push_back(std::move(row));
        }
        for (const auto& e : s.expectedVerdicts) {
            const SweepRow* row = find_sweep(r, e.alpha);
            const std::string want = dirichlet::to_string(e.verdict);
            const std::string got = row ? row->verdict : "none";
            r.gates.push_back({"verdict alpha=" + short_num(e.alpha), got == want,
                               "expected " + want + ", got " + got});
        }
        for (const auto& e : s.expectedSlopes) {
            const SweepRow* row = find_sweep(r, e.alpha);
            const auto slope = row ? row->sweep.incrementSlope : std::nullopt;
            const bool pass = slope && std::abs(*slope - e.value) <= e.relativeTolerance * std::abs(e.value);
            r.gates.push_back({"slope alpha=" + short_num(e.alpha), pass,
                               "expected " + num(e.value) + " within " + short_num(e.relativeTolerance) +
                                   " relative, got " + (slope ? num(*slope) : std::string("none"))});
        }
    }

    if (wantMc) {
        const MonteCarloSpec& mc = *s.monteCarlo;
        const std::size_t modes = mc.modes.value_or(s.resolved_modes());
        const Problem pb = build_problem(s, modes);
        const TimeGrid grid(T, mc.steps);
        std::optional<PathEnsemble> ens;
        std::optional<PathSampler> sampler;
        {
            Stopwatch sw(result.timing, "sampling");
            sampler.emplace(pb.op, pb.x, grid, mc.seed);
            r.factorMethod = to_string(sampler->step().method);
            if (opt.ensemble) {
                ens = read_ensemble(*opt.ensemble);
                if (!(ens->grid == grid) || ens->modes != modes || ens->nPaths != mc.paths || ens->seed != mc.seed) {
                    throw ScenarioError(opt.ensemble->string() +
                                        ": stored ensemble does not match scenario.monte_carlo (steps, modes, "
                                        "paths, seed or horizon)");
                }
            } else if (stage == Stage::Sample || mc.dump) {
                ens = sample_paths(pb.op, pb.x, grid, mc.paths, mc.seed, threads);
            }
        }

        Stopwatch sw(result.timing, "monte_carlo");
        for (double alpha : s.queries.alphas) {
            const double theta = theta_for(s, alpha);
            PathFunctionals f;
            if (alpha > 0.0) {
                f = ens ? ensemble_functionals(*ens, alpha, pb.op, theta, mc.kernel, threads)
                        : stream_functionals(*sampler, mc.paths, alpha, pb.op, theta, mc.kernel, threads);
            } else {
                f = l2_only(*sampler, ens, mc.paths, pb.op, theta, threads);
            }

            auto make_row = [&](const std::string& functional, const std::vector<double>& fine,
                                const std::vector<double>& coarse, double order, double oracle, double discrete) {
                McRow row;
                row.alpha = alpha;
                row.theta = theta;
                row.functional = functional;
                row.steps = mc.steps;
                row.paths = mc.paths;
                SeminormEstimate tag;
                tag.alpha = functional == "l2" ? 0.0 : alpha;
                tag.theta = theta;
                tag.kernelScheme = mc.kernel;
                row.estimate = refine(fine, coarse, order, tag);
                row.oracle = oracle;
                row.discreteOracle = discrete;
                if (gateMc) {
                    const double relBias = oracle != 0.0 ? std::abs(row.estimate.bias) / std::abs(oracle) : 0.0;
                    row.gate = oracle_gate(row.estimate.fine, oracle, mc.sigma, relBias);
                    row.discreteGate = oracle_gate(row.estimate.fine, discrete, mc.sigma, 0.0);
                    const std::string tagname = "mc " + functional + " alpha=" + short_num(alpha);
                    r.gates.push_back({tagname + " vs oracle", row.gate->pass,
                                       "|" + num(row.estimate.fine.mean) + " - " + num(oracle) +
                                           "| = " + num(row.gate->deviation) + " <= " + num(row.gate->allowance)});
                    r.gates.push_back({tagname + " vs discrete oracle", row.discreteGate->pass,
                                       "|" + num(row.estimate.fine.mean) + " - " + num(discrete) + "| = " +
                                           num(row.discreteGate->deviation) + " <= " +
                                           num(row.discreteGate->allowance)});
                }
                r.monteCarlo.push_back(std::move(row));
            };

            if (alpha > 0.0) {
                const double oracle =
                    seminorm_second_moment(pb.op, pb.x, RegularityQuery{alpha, T, theta}, s.tolerance, threads);
                const double discrete = expected_discrete_seminorm(pb.op, pb.x, grid, alpha, theta, mc.kernel);
                make_row("seminorm", f.seminormFine, f.seminormCoarse, seminorm_bias_order(alpha), oracle, discrete);
            }
            make_row("l2", f.l2Fine, f.l2Coarse, kL2BiasOrder, l2_second_moment(pb.op, pb.x, T, theta),
                     expected_discrete_l2(pb.op, pb.x, grid, theta));
        }
        if (stage == Stage::Sample || mc.dump) result.ensemble = std::move(ens);
    }
    return result;
}

ordered_json to_json(const RunReport& r) {
    ordered_json j;
    j["schema"] = r.schema;
    j["version"] = r.version;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    j["stage"] = r.stage;
    j["scenario"] = r.scenario;
    j["tolerance"] = r.tolerance;

    j["moments"] = ordered_json::array();
    for (const auto& m : r.moments) {
        ordered_json row;
        row["alpha"] = m.alpha;
        row["theta"] = m.theta;
        row["modes"] = m.modes;
        row["reference_norm"] = m.referenceNorm;
        row["seminorm_moment"] = opt(m.seminormMoment);
        row["l2_moment"] = m.l2Moment;
        row["ratio"] = m.ratio;
        row["certificate"] = m.certificate ? certificate_json(*m.certificate) : ordered_json(nullptr);
        if (m.membership) {
            row["membership"] = {{"member", m.membership->member},
                                 {"term_exponent", m.membership->termExponent},
                                 {"growth_exponent", opt(m.membership->growthExponent)}};
        } else {
            row["membership"] = nullptr;
        }
        j["moments"].push_back(row);
    }

    j["sweeps"] = ordered_json::array();
    for (const auto& sw : r.sweeps) {
        ordered_json row;
        row["alpha"] = sw.alpha;
        row["truncations"] = sw.sweep.truncations;
        row["values"] = sw.sweep.values;
        row["top_relative_change"] = sw.sweep.topRelativeChange;
        row["partial_sum_slope"] = opt(sw.sweep.partialSumSlope);
        row["increment_slope"] = opt(sw.sweep.incrementSlope);
        row["verdict"] = sw.verdict;
        row["slope"] = opt(sw.slope);
        j["sweeps"].push_back(row);
    }

    j["monte_carlo"] = ordered_json::array();
    for (const auto& m : r.monteCarlo) {
        ordered_json row;
        row["alpha"] = m.alpha;
        row["theta"] = m.theta;
        row["functional"] = m.functional;
        row["steps"] = m.steps;
        row["paths"] = m.paths;
        row["fine"] = estimate_json(m.estimate.fine);
        row["coarse"] = estimate_json(m.estimate.coarse);
        row["bias_order"] = m.estimate.order;
        row["bias"] = m.estimate.bias;
        row["bias_std_error"] = m.estimate.biasStdError;
        row["extrapolated"] = estimate_json(m.estimate.extrapolated);
        row["oracle"] = m.oracle;
        row["discrete_oracle"] = m.discreteOracle;
        row["gate"] = gate_json(m.gate);
        row["discrete_gate"] = gate_json(m.discreteGate);
        j["monte_carlo"].push_back(row);
    }
    j["factor_method"] = opt(r.factorMethod);

    j["gates"] = ordered_json::array();
    for (const auto& g : r.gates) j["gates"].push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
    j["passed"] = r.passed();
    return j;
}

RunReport report_from_json(const ordered_json& j) {
    RunReport r;
    try {
        r.schema = j.at("schema").get<std::string>();
        if (r.schema != kReportSchema) throw std::runtime_error("unsupported report schema '" + r.schema + "'");
        r.version = j.at("version").get<std::string>();
        r.stage = j.at("stage").get<std::string>();
        r.scenario = j.at("scenario");
        r.tolerance = number(j, "tolerance");
        for (const auto& row : j.at("moments")) {
            MomentRow m;
            m.alpha = number(row, "alpha");
            m.theta = number(row, "theta");
            m.modes = row.at("modes").get<std::size_t>();
            m.referenceNorm = number(row, "reference_norm");
            m.seminormMoment = opt_from<double>(row, "seminorm_moment");
            m.l2Moment = number(row, "l2_moment");
            m.ratio = number(row, "ratio");
            if (!row.at("certificate").is_null()) m.certificate = certificate_from(row.at("certificate"));
            if (!row.at("membership").is_null()) {
                const auto& ms = row.at("membership");
                m.membership = Membership{ms.at("member").get<bool>(), number(ms, "term_exponent"),
                                          opt_from<double>(ms, "growth_exponent")};
            }
            r.moments.push_back(std::move(m));
        }
        for (const auto& row : j.at("sweeps")) {
            SweepRow s;
            s.alpha = number(row, "alpha");
            s.sweep.truncations = row.at("truncations").get<std::vector<std::size_t>>();
            s.sweep.values = row.at("values").get<std::vector<double>>();
            s.sweep.topRelativeChange = number(row, "top_relative_change");
            s.sweep.partialSumSlope = opt_from<double>(row, "partial_sum_slope");
            s.sweep.incrementSlope = opt_from<double>(row, "increment_slope");
            s.verdict = row.at("verdict").get<std::string>();
            s.slope = opt_from<double>(row, "slope");
            r.sweeps.push_back(std::move(s));
        }
        for (const auto& row : j.at("monte_carlo")) {
            McRow m;
            m.alpha = number(row, "alpha");
            m.theta = number(row, "theta");
            m.functional = row.at("functional").get<std::string>();
            m.steps = row.at("steps").get<std::size_t>();
            m.paths = row.at("paths").get<std::size_t>();
            m.estimate.fine = estimate_from(row.at("fine"));
            m.estimate.coarse = estimate_from(row.at("coarse"));
            m.estimate.order = number(row, "bias_order");
            m.estimate.bias = number(row, "bias");
            m.estimate.biasStdError = number(row, "bias_std_error");
            m.estimate.extrapolated = estimate_from(row.at("extrapolated"));
            m.oracle = number(row, "oracle");
            m.discreteOracle = number(row, "discrete_oracle");
            m.gate = gate_from(row.at("gate"));
            m.discreteGate = gate_from(row.at("discrete_gate"));
            r.monteCarlo.push_back(std::move(m));
        }
        r.factorMethod = opt_from<std::string>(j, "factor_method");
        for (const auto& g : j.at("gates")) {
            r.gates.push_back({g.at("name").get<std::string>(), g.at("pass").get<bool>(),
                               g.at("detail").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed report: ") + e.what());
    }
    return r;
}

RunReport load_report(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open report " + file.string());
    try {
        return report_from_json(ordered_json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

std::string moments_csv(const RunReport& r) {
    std::ostringstream o;
    o << "alpha,theta,modes,reference_norm,seminorm_moment,l2_moment,ratio,verdict,slope,member,certificate\n";
    for (const auto& m : r.moments) {
        const SweepRow* sw = find_sweep(r, m.alpha);
        o << num(m.alpha) << ',' << num(m.theta) << ',' << m.modes << ',' << num(m.referenceNorm) << ','
          << (m.seminormMoment ? num(*m.seminormMoment) : "") << ',' << num(m.l2Moment) << ',' << num(m.ratio) << ','
          << (sw ? sw->verdict : "") << ',' << (sw && sw->slope ? num(*sw->slope) : "") << ','
          << (m.membership ? (m.membership->member ? "yes" : "no") : "") << ','
          << (m.certificate ? (m.certificate->allHold() ? "holds" : "fails") : "") << '\n';
    }
    return o.str();
}

std::string sweep_csv(const RunReport& r) {
    std::ostringstream o;
    o << "alpha,truncation,moment,log_truncation,log_moment,verdict\n";
    for (const auto& sw : r.sweeps) {
        for (std::size_t i = 0; i < sw.sweep.truncations.size(); ++i) {
            const double n = static_cast<double>(sw.sweep.truncations[i]);
            const double v = sw.sweep.values[i];
            o << num(sw.alpha) << ',' << sw.sweep.truncations[i] << ',' << num(v) << ',' << num(std::log(n)) << ','
              << (v > 0.0 ? num(std::log(v)) : "") << ',' << sw.verdict << '\n';
        }
    }
    return o.str();
}

std::string mc_csv(const RunReport& r) {
    auto verdict = [](const std::optional<GateResult>& g) -> std::string {
        if (!g) return "";
        return g->pass ? "pass" : "fail";
    };
    std::ostringstream o;
    o << "alpha,theta,functional,steps,paths,fine_mean,fine_se,coarse_mean,coarse_se,bias_order,bias,bias_se,"
         "extrapolated,extrapolated_se,oracle,discrete_oracle,gate,discrete_gate\n";
    for (const auto& m : r.monteCarlo) {
        const auto& e = m.estimate;
        o << num(m.alpha) << ',' << num(m.theta) << ',' << m.functional << ',' << m.steps << ',' << m.paths << ','
          << num(e.fine.mean) << ',' << num(e.fine.stdError) << ',' << num(e.coarse.mean) << ','
          << num(e.coarse.stdError) << ',' << num(e.order) << ',' << num(e.bias) << ',' << num(e.biasStdError) << ','
          << num(e.extrapolated.mean) << ',' << num(e.extrapolated.stdError) << ',' << num(m.oracle) << ','
          << num(m.discreteOracle) << ',' << verdict(m.gate) << ',' << verdict(m.discreteGate) << '\n';
    }
    return o.str();
}

namespace {

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace

void write_artifacts(const RunReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", to_json(r).dump(2) + "\n");
    if (!r.moments.empty()) write_text(dir / "moments.csv", moments_csv(r));
    if (!r.sweeps.empty()) write_text(dir / "sweep.csv", sweep_csv(r));
    if (!r.monteCarlo.empty()) write_text(dir / "mc.csv", mc_csv(r));
}

void write_artifacts(const RunResult& r, const std::filesystem::path& dir, unsigned threads) {
    write_artifacts(r.report, dir);
    if (r.ensemble) write_ensemble(dir / "ensemble.bin", *r.ensemble);
    ordered_json t;
    t["threads"] = threads;
    ordered_json stages = ordered_json::object();
    double total = 0.0;
    for (const auto& [name, sec] : r.timing) {
        stages[name] = sec;
        total += sec;
    }
    t["seconds"] = stages;
    t["total_seconds"] = total;
    write_text(dir / "timing.json", t.dump(2) + "\n");
}

}  // namespace sobolab::lab
