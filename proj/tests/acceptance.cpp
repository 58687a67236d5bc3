// Acceptance battery: one line per criterion, exit status 0 iff every criterion passes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sobolab/dirichlet_frontend.hpp"
#include "sobolab/empirical_norms.hpp"
#include "sobolab/lab.hpp"
#include "sobolab/moment_oracle.hpp"
#include "sobolab/path_sampler.hpp"

using namespace sobolab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> squares(std::size_t n) {
    std::vector<double> ev(n);
    for (std::size_t k = 0; k < n; ++k) ev[k] = double(k + 1) * double(k + 1);
    return ev;
}

const std::filesystem::path kScenarios = SOBOLAB_SCENARIO_DIR;

// 1. Closed-form L^2 moment and its Monte Carlo estimate.
Outcome exact_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralOperator op({1.0});
    const SpectralVector x({1.0});
    const double closed = 0.5 - (1.0 - std::exp(-2.0)) / 4.0;
    const double oracle = l2_second_moment(op, x, 1.0, 0.5);
    const bool exact = std::abs(oracle - closed) <= 1e-12 && std::abs(oracle - 0.283834) < 5e-7;

    const TimeGrid grid(1.0, 1024);
    const PathSampler sampler(op, x, grid, 20240601);
    const auto f = stream_functionals(sampler, 10000, 0.2, op, 0.5, KernelScheme::CellExact);
    const auto r = refine(f.l2Fine, f.l2Coarse, kL2BiasOrder, SeminormEstimate{});
    const auto gate = oracle_gate(r.fine, oracle, 3.0, std::abs(r.bias) / oracle);
    const double t = seconds_since(t0);
    return {exact && gate.pass && t < 10.0,
            "oracle " + fmt("%.15f", oracle) + ", |oracle - closed form| " + fmt("%.1e", std::abs(oracle - closed)) +
                "; MC " + fmt("%.6f", r.fine.mean) + " +- " + fmt("%.6f", r.fine.stdError) + ", deviation " +
                fmt("%.2e", gate.deviation) + " <= " + fmt("%.2e", gate.allowance) + "; " + fmt("%.2f s", t)};
}

// 2. Komatsu constants.
Outcome komatsu() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double alpha : {0.05, 0.1, 0.25, 0.4, 0.45}) {
        const double q = komatsu_constant(alpha, 1e-12);
        worst = std::max(worst, std::abs(q / komatsu_closed_form(alpha) - 1.0));
    }
    const double at_quarter = komatsu_constant(0.25, 1e-12);
    const bool quarter = std::abs(at_quarter - 2.0 * std::sqrt(M_PI)) <= 1e-8 * at_quarter;
    const double t = seconds_since(t0);
    return {worst <= 1e-8 && quarter && t < 1.0,
            "max relative error " + fmt("%.1e", worst) + ", K_1/4 = " + fmt("%.10f", at_quarter) + "; " +
                fmt("%.3f s", t)};
}

// 3. Lower-bound certificates on random truncated vectors.
Outcome certificates() {
    const SpectralOperator op(squares(256));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> decay(0.5, 2.0);
    int failures = 0;
    int checks = 0;
    double tightest = INFINITY;
    for (int v = 0; v < 20; ++v) {
        const double p = decay(rng);
        std::vector<double> c(256);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = g(rng) * std::pow(double(k + 1), -p);
        const SpectralVector x(c);
        for (double alpha : {0.1, 0.25, 0.4}) {
            for (double T : {1.0, 4.0}) {
                const auto cert = certificate(op, x, RegularityQuery{alpha, T, 0.5}, 1e-10);
                ++checks;
                if (!(cert.seminormLowerHolds && cert.lowerBoundHolds)) ++failures;
                tightest = std::min(tightest, cert.fullMoment() / cert.lowerBoundRHS);
            }
        }
    }
    return {failures == 0, std::to_string(checks) + " certificates, " + std::to_string(failures) +
                               " failures, smallest full/lower ratio " + fmt("%.3f", tightest)};
}

// 4. Uniform two-sided constants.
Outcome equivalence() {
    double lo = INFINITY;
    double hi = 0.0;
    for (double alpha : {0.1, 0.25, 0.4}) {
        for (double lambda : {1.0, 1e2, 1e4, 1e6}) {
            const double f = seminorm_mode_factor(lambda, alpha, 1.0, 1e-11).value;
            const double ratio = std::sqrt(f + l2_mode_factor(lambda, 1.0)) / std::pow(lambda, alpha);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    const SpectralOperator op(squares(256));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> extra(0.1, 1.5);
    int outside = 0;
    double vlo = INFINITY;
    double vhi = 0.0;
    for (int v = 0; v < 20; ++v) {
        const double alpha = std::array{0.1, 0.25, 0.4}[v % 3];
        // Member of D(A^alpha): 4 alpha - 2 p < -1.
        const double p = 2.0 * alpha + 0.5 + extra(rng);
        std::vector<double> c(256);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = g(rng) * std::pow(double(k + 1), -p);
        const double r = equivalence_ratio(op, SpectralVector(c), RegularityQuery{alpha, 1.0, 0.5}, 1e-10);
        vlo = std::min(vlo, r);
        vhi = std::max(vhi, r);
        if (r < lo || r > hi) ++outside;
    }
    return {hi / lo < 50.0 && outside == 0,
            "per-mode envelope [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "] (endpoint ratio " +
                fmt("%.2f", hi / lo) + "); vectors in [" + fmt("%.4f", vlo) + ", " + fmt("%.4f", vhi) + "], " +
                std::to_string(outside) + " outside"};
}

// 5. Divergence slope at alpha = 0.3 and Cauchy sweep at alpha = 0.2.
Outcome dichotomy() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> ns;
    for (std::size_t n = 64; n <= 8192; n *= 2) ns.push_back(n);
    const auto fam = PowerFamily{1.0, 1.0, 1.0, 2.0};
    const auto op = fam.make_operator(ns.back());
    const auto x = fam.make_vector(ns.back());
    const auto s3 = truncation_sweep(seminorm_mode_contributions(op, x, {0.3, 1.0, 0.5}, 1e-8), ns);
    const auto s2 = truncation_sweep(seminorm_mode_contributions(op, x, {0.2, 1.0, 0.5}, 1e-8), ns);
    const double slope = s3.incrementSlope.value_or(NAN);
    const bool a = std::abs(slope - 0.2) <= 0.1 * 0.2;
    const bool b = s2.topRelativeChange < 0.01;
    const double t = seconds_since(t0);
    return {a && b && t < 60.0,
            std::string("alpha=0.3 slope ") + fmt("%.4f", slope) + (a ? " (pass)" : " (FAIL)") +
                "; alpha=0.2 top-two relative change " + fmt("%.4f", s2.topRelativeChange) +
                (b ? " < 0.01 (pass)" : " >= 0.01 (FAIL)") + "; " + fmt("%.1f s", t)};
}

// 6. The bundled Dirichlet scenario.
Outcome dirichlet_threshold() {
    const auto s = lab::load_scenario(kScenarios / "dirichlet-h1.json");
    const auto r = lab::execute(s, lab::Stage::Sweep, {}).report;
    std::string v02 = "?";
    std::string v03 = "?";
    for (const auto& sw : r.sweeps) {
        if (sw.alpha == 0.2) v02 = sw.verdict;
        if (sw.alpha == 0.3) v03 = sw.verdict;
    }
    const dirichlet::IntervalDomain d{1.0};
    const auto x = dirichlet::sine_coefficients(dirichlet::sample_profile(dirichlet::Profile::One, d, 1 << 14), d, 128);
    double worst = 0.0;
    for (std::size_t k = 1; k <= 128; k += 2) {
        worst = std::max(worst, std::abs(x[k - 1] - 2.0 * std::sqrt(2.0) / (double(k) * M_PI)));
    }
    const bool pass = v02 == "finite-stable" && v03 == "diverging" && worst <= 1e-6;
    return {pass, "alpha=0.2 " + v02 + ", alpha=0.3 " + v03 + "; max coefficient error " + fmt("%.1e", worst)};
}

// 7. Mixed-scale stability for rough data.
Outcome smr() {
    const std::vector<std::size_t> ns{2048, 4096};
    const auto fam = PowerFamily{1.0, 0.51, 1.0, 2.0};
    const auto op = fam.make_operator(4096);
    const auto x = fam.make_vector(4096);
    const auto sweep = truncation_sweep(seminorm_mode_contributions(op, x, {0.3, 1.0, 0.2}, 1e-8), ns);
    return {sweep.topRelativeChange < 0.01, "relative change from N=2048 to N=4096: " +
                                                fmt("%.4f", sweep.topRelativeChange) + " (bound 0.01)"};
}

// 8. Sampler covariance at grid-point pairs.
Outcome sampler_exactness() {
    struct Pair {
        std::size_t i, j;
    };
    const std::vector<Pair> pairs{{8, 8}, {16, 16}, {4, 12}, {2, 16}, {10, 11}};
    int gates = 0;
    int failures = 0;
    double worst = 0.0;
    auto check = [&](const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid, std::size_t stride,
                     std::uint64_t seed) {
        const std::size_t n = 10000;
        const auto e = sample_paths(op, x, grid, n, seed);
        const std::size_t m = op.size();
        const double norm = 1.0 / double(m);
        for (const auto& pr : pairs) {
            const std::size_t i = pr.i * stride;
            const std::size_t j = pr.j * stride;
            // Statistic: (1^T u(t_i)) (1^T u(t_j)) / m, whose mean is the sum of all covariance entries / m.
            const auto exact = exact_marginal_covariance(op, x, grid.time(i), grid.time(j));
            const double target = exact.sum() * norm;
            std::vector<double> prod(n);
            for (std::size_t p = 0; p < n; ++p) {
                double a = 0.0;
                double b = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    a += e.value(p, j, k);
                    b += e.value(p, i, k);
                }
                prod[p] = a * b * norm;
            }
            const auto est = summarize(prod);
            const double z = std::abs(est.mean - target) / est.stdError;
            worst = std::max(worst, z);
            ++gates;
            if (z > 3.0) ++failures;
        }
    };
    const SpectralOperator two({1.0, 5.0});
    const SpectralVector x2({1.0, -0.6});
    const SpectralOperator sixteen(squares(16));
    std::vector<double> c16(16);
    for (std::size_t k = 0; k < 16; ++k) c16[k] = 1.0 / double(k + 1);
    const SpectralVector x16(c16);
    for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
        check(two, x2, TimeGrid(1.0, 16), 1, seed);
        check(sixteen, x16, TimeGrid(1.0, 16), 1, seed);
    }
    // Refined grid: the oracle at common points is the same and the gates re-pass.
    const TimeGrid coarse(1.0, 16);
    const TimeGrid fine(1.0, 64);
    bool same_oracle = true;
    for (const auto& pr : pairs) {
        const auto a = exact_marginal_covariance(sixteen, x16, coarse.time(pr.i), coarse.time(pr.j));
        const auto b = exact_marginal_covariance(sixteen, x16, fine.time(4 * pr.i), fine.time(4 * pr.j));
        same_oracle = same_oracle && (a == b);
    }
    check(two, x2, fine, 4, 66);
    check(sixteen, x16, fine, 4, 66);
    return {failures == 0 && same_oracle,
            std::to_string(gates) + " covariance gates, " + std::to_string(failures) + " beyond 3 SE (max " +
                fmt("%.2f", worst) + " SE); refined-grid oracle " + (same_oracle ? "identical" : "DIFFERENT")};
}

// 9. Bit-identical reruns and sharded ensembles.
Outcome determinism() {
    int mismatches = 0;
    int compared = 0;
    const auto scratch = std::filesystem::temp_directory_path() / "sobolab-acceptance";
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream o;
        o << in.rdbuf();
        return o.str();
    };
    for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
        if (entry.path().extension() != ".json") continue;
        const auto s = lab::load_scenario(entry.path());
        const auto a = scratch / (entry.path().stem().string() + "-a");
        const auto b = scratch / (entry.path().stem().string() + "-b");
        std::filesystem::remove_all(a);
        std::filesystem::remove_all(b);
        lab::write_artifacts(lab::execute(s, lab::Stage::Run, {}).report, a);
        lab::RunOptions par;
        par.threads = 4;
        lab::write_artifacts(lab::execute(s, lab::Stage::Run, par).report, b);
        for (const auto& f : std::filesystem::directory_iterator(a)) {
            ++compared;
            if (slurp(f.path()) != slurp(b / f.path().filename())) ++mismatches;
        }
    }
    const SpectralOperator op(squares(8));
    const SpectralVector x(std::vector<double>(8, 0.5));
    const TimeGrid grid(1.0, 128);
    const auto e1 = sample_paths(op, x, grid, 1000, 77, 1);
    const auto e2 = sample_paths(op, x, grid, 1000, 77, 2);
    const auto e8 = sample_paths(op, x, grid, 1000, 77, 8);
    const bool sharded = e1.values == e2.values && e1.values == e8.values;
    return {mismatches == 0 && sharded && compared > 0,
            std::to_string(compared) + " artifact files from rerun bundled scenarios, " + std::to_string(mismatches) +
                " differ; ensembles with 1/2/8 workers " + (sharded ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"exact L2 identity and Monte Carlo", exact_identity},
        {"Komatsu constants", komatsu},
        {"lower-bound certificates", certificates},
        {"two-sided equivalence", equivalence},
        {"dichotomy sweep", dichotomy},
        {"Dirichlet threshold", dirichlet_threshold},
        {"mixed-scale stability", smr},
        {"sampler exactness", sampler_exactness},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("criterion %zu %s: %s - %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
