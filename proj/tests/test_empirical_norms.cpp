#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include "sobolab/empirical_norms.hpp"
#include "sobolab/moment_oracle.hpp"
#include "sobolab/quadrature.hpp"

using namespace sobolab;

namespace {

// int over [0, dt] x [d dt, (d+1) dt] of |t - s|^{-1-2 alpha}, written as an
// integral over r = t - s with the triangular overlap weight.
double cell_integral_by_quadrature(double alpha, double dt, std::size_t d) {
    const double beta = 1.0 + 2.0 * alpha;
    const double c = static_cast<double>(d) * dt;
    auto tri = [&](double r) { return (dt - std::abs(r - c)) * std::pow(r, -beta); };
    const quadrature::AdaptiveOptions opt{1e-13, 0.0, 20000};
    if (d == 1) {
        // On [0, dt] the weight is r, leaving r^{-2 alpha}.
        const quadrature::WeakSingularProblem near{[](double) { return 1.0; }, 2.0 * alpha, dt, 1.0 / dt};
        const std::vector<double> far{dt, 2.0 * dt};
        return quadrature::integrate_graded(near, opt).value + quadrature::integrate_adaptive(tri, far, opt).value;
    }
    const std::vector<double> breaks{c - dt, c, c + dt};
    return quadrature::integrate_adaptive(tri, breaks, opt).value;
}

double brute_seminorm(const std::vector<double>& path, std::size_t modes, std::size_t cells, const KernelWeights& w,
                      const std::vector<double>& sw) {
    double acc = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t j = 0; j < cells; ++j) {
            if (i == j) continue;
            const std::size_t d = i > j ? i - j : j - i;
            for (std::size_t k = 0; k < modes; ++k) {
                const double diff = path[i * modes + k] - path[j * modes + k];
                acc += w.weight(d) * sw[k] * diff * diff;
            }
        }
    }
    return acc;
}

std::vector<double> one_mode_path(const TimeGrid& g, double (*f)(double)) {
    std::vector<double> v(g.points());
    for (std::size_t i = 0; i < g.points(); ++i) v[i] = f(g.time(i));
    return v;
}

}  // namespace

TEST_CASE("kernel scheme names") {
    CHECK(kernel_scheme_from_string("cell-exact") == KernelScheme::CellExact);
    CHECK(kernel_scheme_from_string("diagonal-excluded") == KernelScheme::DiagonalExcluded);
    CHECK(std::string(to_string(KernelScheme::DiagonalExcluded)) == "diagonal-excluded");
    CHECK_THROWS_AS(kernel_scheme_from_string("midpoint"), std::invalid_argument);
}

TEST_CASE("cell weights against quadrature") {
    for (double alpha : {0.1, 0.25, 0.45}) {
        const double dt = 1.0 / 64.0;
        const KernelWeights w(alpha, dt, 128, KernelScheme::CellExact);
        CHECK(w.weight(0) == 0.0);
        for (std::size_t d : {1u, 2u, 10u, 100u}) {
            const double q = cell_integral_by_quadrature(alpha, dt, d);
            CHECK(w.weight(d) == doctest::Approx(q).epsilon(1e-10));
            CHECK(cell_kernel_integral(alpha, dt, d) == w.weight(d));
        }
    }
    const KernelWeights mid(0.2, 0.5, 4, KernelScheme::DiagonalExcluded);
    CHECK(mid.weight(2) == doctest::Approx(0.25 * std::pow(1.0, -1.4)));
}

TEST_CASE("hybrid seminorm equals the direct double sum") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (std::size_t cells : {16u, 300u}) {
        const std::size_t modes = 3;
        std::vector<double> path((cells + 1) * modes);
        for (double& v : path) v = g(rng);
        const std::vector<double> sw{1.0, 2.5, 0.1};
        const KernelWeights w(0.3, 1.0 / double(cells), cells, KernelScheme::CellExact);
        const double direct = brute_seminorm(path, modes, cells, w, sw);
        CHECK(discrete_seminorm(path, modes, w, sw) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("smooth path oracles") {
    const double T = 1.0;
    const SpectralOperator unit({1.0});
    for (double alpha : {0.2, 0.4}) {
        // v(t) = t
        const double linear = 2.0 * std::pow(T, 3.0 - 2.0 * alpha) / ((2.0 - 2.0 * alpha) * (3.0 - 2.0 * alpha));
        // v(t) = t^2
        const std::vector<double> breaks{0.0, T};
        const double quadratic =
            quadrature::integrate_adaptive(
                [&](double tau) {
                    return 2.0 * std::pow(tau, 1.0 - 2.0 * alpha) *
                           (std::pow(2.0 * T - tau, 3) - std::pow(tau, 3)) / 6.0;
                },
                breaks, {1e-13, 0.0, 20000})
                .value;

        double prevLinear = 1.0;
        double prevQuadratic = 1.0;
        for (std::size_t n : {256u, 1024u, 4096u}) {
            const TimeGrid g(T, n);
            const auto lin = one_mode_path(g, [](double t) { return t; });
            const auto quad = one_mode_path(g, [](double t) { return t * t; });
            const double errL = std::abs(discrete_seminorm(lin, g, alpha, unit, 0.5) / linear - 1.0);
            const double errQ = std::abs(discrete_seminorm(quad, g, alpha, unit, 0.5) / quadratic - 1.0);
            CHECK(errL < prevLinear);
            CHECK(errQ < prevQuadratic);
            prevLinear = errL;
            prevQuadratic = errQ;
        }
        CHECK(prevLinear < 2e-3);
        CHECK(prevQuadratic < 2e-3);
    }
}

TEST_CASE("discrete L2 is the trapezoid rule") {
    const TimeGrid g(2.0, 8);
    const auto v = one_mode_path(g, [](double t) { return t; });
    const std::vector<double> sw{3.0};
    // Trapezoid on t^2 over [0, T]: T^3 / 3 + T dt^2 / 6.
    CHECK(discrete_l2(v, 1, g.dt(), sw) == doctest::Approx(3.0 * (8.0 / 3.0 + 2.0 * 0.0625 / 6.0)).epsilon(1e-14));
}

TEST_CASE("coarsening keeps every second grid point") {
    const std::vector<double> p{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};  // 5 points, 2 modes
    const auto c = coarsen_path(p, 2);
    CHECK(c == std::vector<double>{0, 1, 4, 5, 8, 9});
    CHECK_THROWS_AS(coarsen_path(std::vector<double>{0, 1, 2, 3}, 2), std::invalid_argument);
}

TEST_CASE("estimators scale quadratically, exactly") {
    const SpectralOperator op({1.0, 9.0});
    const auto e = sample_paths(op, SpectralVector({1.0, 0.5}), TimeGrid(1.0, 128), 50, 11);
    PathEnsemble doubled = e;
    for (double& v : doubled.values) v *= 2.0;
    const auto a = mc_seminorm(e, 0.3, op, 0.5);
    const auto b = mc_seminorm(doubled, 0.3, op, 0.5);
    CHECK(b.mean == 4.0 * a.mean);
    CHECK(b.stdError == 4.0 * a.stdError);
    CHECK(mc_l2(doubled, op, 0.5).mean == 4.0 * mc_l2(e, op, 0.5).mean);
    CHECK(mc_seminorm(e, 0.3, op, 0.5, KernelScheme::CellExact, 3).mean == a.mean);
}

TEST_CASE("summary statistics and paired refinement") {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const auto s = summarize(xs);
    CHECK(s.mean == 2.5);
    CHECK(s.stdError == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));

    const std::vector<double> fine{1.0, 1.0, 1.0};
    const std::vector<double> coarse{1.3, 1.3, 1.3};
    const auto r = refine(fine, coarse, 2.0, SeminormEstimate{});
    CHECK(r.bias == doctest::Approx(0.1));
    CHECK(r.extrapolated.mean == doctest::Approx(0.9));
    CHECK(r.biasStdError == 0.0);
    CHECK_THROWS_AS(refine(fine, xs, 2.0, SeminormEstimate{}), std::invalid_argument);
}

TEST_CASE("gate arithmetic") {
    SeminormEstimate e;
    e.mean = 1.1;
    e.stdError = 0.02;
    const auto pass = oracle_gate(e, 1.0, 3.0, 0.05);
    CHECK(pass.pass);
    CHECK(pass.allowance == doctest::Approx(0.11));
    CHECK(pass.margin() == doctest::Approx(0.01));
    CHECK_FALSE(oracle_gate(e, 1.0, 3.0, 0.0).pass);
    CHECK_THROWS_AS(oracle_gate(e, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("measured bias order of the exact discrete expectation") {
    const SpectralOperator op({1.0});
    const SpectralVector x({1.0});
    for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.45}) {
        CHECK(seminorm_bias_order(alpha) == 1.0);
        const double oracle = seminorm_second_moment(op, x, RegularityQuery{alpha, 1.0, 0.5}, 1e-13);
        std::vector<double> err;
        for (std::size_t n = 64; n <= 4096; n *= 2) {
            err.push_back(expected_discrete_seminorm(op, x, TimeGrid(1.0, n), alpha, 0.5) - oracle);
        }
        for (std::size_t i = 1; i < err.size(); ++i) {
            const double rate = std::log2(err[i - 1] / err[i]);
            CHECK(rate >= 1.0);
            CHECK(rate <= 2.0 - 2.0 * alpha + 0.02);
            // Richardson with order 1 never understates the bias of the finer grid.
            CHECK(std::abs(err[i - 1] - err[i]) >= std::abs(err[i]));
        }
    }
    const double l2 = l2_second_moment(op, x, 1.0, 0.5);
    const double e1 = expected_discrete_l2(op, x, TimeGrid(1.0, 64), 0.5) - l2;
    const double e2 = expected_discrete_l2(op, x, TimeGrid(1.0, 128), 0.5) - l2;
    CHECK(std::log2(e1 / e2) == doctest::Approx(kL2BiasOrder).epsilon(0.05));
}

TEST_CASE("Monte Carlo mean matches the exact discrete expectation") {
    const SpectralOperator op({1.0, 6.0});
    const SpectralVector x({1.0, 0.7});
    const TimeGrid grid(1.0, 128);
    const auto e = sample_paths(op, x, grid, 4000, 314);
    for (double alpha : {0.15, 0.35}) {
        const auto est = mc_seminorm(e, alpha, op, 0.5);
        const double exact = expected_discrete_seminorm(op, x, grid, alpha, 0.5);
        CHECK(oracle_gate(est, exact, 3.0, 0.0).pass);
    }
    CHECK(oracle_gate(mc_l2(e, op, 0.5), expected_discrete_l2(op, x, grid, 0.5), 3.0, 0.0).pass);
}

TEST_CASE("streamed and stored functionals agree") {
    const SpectralOperator op({2.0, 5.0});
    const SpectralVector x({1.0, 1.0});
    const TimeGrid grid(1.0, 64);
    const PathSampler sampler(op, x, grid, 8);
    const auto ens = sample_paths(op, x, grid, 40, 8);
    const auto a = stream_functionals(sampler, 40, 0.25, op, 0.5, KernelScheme::CellExact, 2);
    const auto b = ensemble_functionals(ens, 0.25, op, 0.5, KernelScheme::CellExact, 1);
    CHECK(a.seminormFine == b.seminormFine);
    CHECK(a.seminormCoarse == b.seminormCoarse);
    CHECK(a.l2Fine == b.l2Fine);
    CHECK(a.l2Coarse == b.l2Coarse);
}

TEST_CASE("standard error shrinks like paths^{-1/2}") {
    const SpectralOperator op({1.0});
    const SpectralVector x({1.0});
    const TimeGrid grid(1.0, 64);
    const PathSampler sampler(op, x, grid, 77);
    std::vector<double> se;
    for (std::size_t n : {100u, 1000u, 10000u}) {
        const auto f = stream_functionals(sampler, n, 0.2, op, 0.5, KernelScheme::CellExact);
        se.push_back(summarize(f.seminormFine).stdError);
    }
    CHECK(se[0] / se[1] == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
    CHECK(se[1] / se[2] == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
}
