#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>
#include <vector>

#include "sobolab/moment_oracle.hpp"
#include "sobolab/quadrature.hpp"

using namespace sobolab;

namespace {

// Direct evaluation of E|A^{1/2}(u(t) - u(s))|^2 for one unit mode:
// u(t) - u(s) = (a - 1) u(s) + int_s^t e^{-lambda (t - r)} dbeta(r), with both
// variances done by a midpoint sum.
double brute_kernel(double lambda, double s, double t) {
    const int n = 200000;
    auto var = [&](double from, double to, double end) {
        const double h = (to - from) / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = from + (i + 0.5) * h;
            acc += std::exp(-2.0 * lambda * (end - r));
        }
        return acc * h;
    };
    const double a = std::exp(-lambda * (t - s));
    return lambda * ((a - 1.0) * (a - 1.0) * var(0.0, s, s) + var(s, t, t));
}

}  // namespace

TEST_CASE("frozen single-mode values") {
    CHECK(increment_kernel(1.0, 0.0, 1.0) == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-14));
    CHECK(increment_kernel(1.0, 0.0, 1.0) == doctest::Approx(0.43233).epsilon(1e-5));
    CHECK(increment_kernel(1.0, 60.0, 61.0) == doctest::Approx(0.63212).epsilon(1e-5));
    CHECK(l2_mode_factor(1.0, 1.0) == doctest::Approx(0.5 - (1.0 - std::exp(-2.0)) / 4.0).epsilon(1e-14));
    CHECK(l2_mode_factor(1.0, 1.0) == doctest::Approx(0.283834).epsilon(1e-6));
    CHECK(komatsu_closed_form(0.25) == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-15));
    CHECK(komatsu_closed_form(0.1) == doctest::Approx(std::tgamma(0.8) / 0.2).epsilon(1e-15));
}

TEST_CASE("increment kernel against a brute-force variance") {
    for (double lambda : {0.5, 1.0, 7.0}) {
        for (auto [s, t] : {std::pair{0.2, 0.5}, std::pair{0.0, 0.3}, std::pair{1.0, 1.01}}) {
            CHECK(increment_kernel(lambda, s, t) == doctest::Approx(brute_kernel(lambda, s, t)).epsilon(1e-8));
            CHECK(increment_kernel(lambda, t, s) == increment_kernel(lambda, s, t));
        }
    }
    CHECK(increment_kernel(3.0, 0.4, 0.4) == 0.0);
}

TEST_CASE("band integral against quadrature of the kernel") {
    for (double lambda : {0.1, 1.0, 50.0}) {
        for (double tau : {1e-6, 0.01, 0.5, 0.99}) {
            const std::vector<double> breaks{0.0, 1.0 - tau};
            const auto q = quadrature::integrate_adaptive(
                [&](double s) { return increment_kernel(lambda, s, s + tau); }, breaks, {1e-13, 0.0, 20000});
            CHECK(increment_band_integral(lambda, tau, 1.0) == doctest::Approx(q.value).epsilon(1e-11));
        }
    }
}

TEST_CASE("per-mode seminorm factor") {
    const auto f = seminorm_mode_factor(1.0, 0.2, 1.0, 1e-12);
    CHECK(f.converged);
    CHECK(f.value == doctest::Approx(1.77825823).epsilon(1e-8));
    CHECK(seminorm_mode_factor(1.0, 0.45, 1.0, 1e-12).value == doctest::Approx(17.6195611).epsilon(1e-8));

    // Two independent quadrature routes agree.
    for (double lambda : {1.0, 1e2, 1e4, 1e6}) {
        for (double alpha : {0.05, 0.25, 0.45}) {
            const double g = seminorm_mode_factor(lambda, alpha, 1.0, 1e-12, QuadratureRoute::Graded).value;
            const double e = seminorm_mode_factor(lambda, alpha, 1.0, 1e-12, QuadratureRoute::Exponential).value;
            CHECK(g == doctest::Approx(e).epsilon(1e-10));
        }
    }
}

TEST_CASE("large-lambda asymptote 2 T K_alpha lambda^{2 alpha}") {
    // The band integral tends to T (1 - e^{-lambda tau}) as lambda grows.
    const double alpha = 0.3;
    const double lambda = 1e8;
    const double f = seminorm_mode_factor(lambda, alpha, 1.0, 1e-12).value;
    CHECK(f / (2.0 * komatsu_closed_form(alpha) * std::pow(lambda, 2.0 * alpha)) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("Komatsu constant") {
    for (double alpha : {0.05, 0.1, 0.25, 0.4, 0.45}) {
        CHECK(komatsu_constant(alpha, 1e-12) == doctest::Approx(komatsu_closed_form(alpha)).epsilon(1e-10));
    }
}

TEST_CASE("named constants") {
    CHECK(theta_alpha_constant(0.25, 1.0) == doctest::Approx(std::pow(2.0, -2.5) / 0.25).epsilon(1e-15));
    CHECK(theta_alpha_constant(0.25, 4.0) == doctest::Approx(std::pow(2.0, -2.5) / 0.25 / 2.0).epsilon(1e-15));
    CHECK(c_delta_constant(1.0, 1.0) == doctest::Approx(l2_mode_factor(1.0, 1.0)).epsilon(1e-15));
    CHECK(c_alpha_constant(0.25, 2.0) == doctest::Approx(std::pow(2.0, -1.5) * 2.0).epsilon(1e-15));
}

TEST_CASE("moments scale with x squared and use the space weight") {
    const SpectralOperator op({1.0, 4.0, 9.0});
    const SpectralVector x({1.0, 0.5, 0.25});
    const RegularityQuery q{0.2, 1.0, 0.5};
    const double m = seminorm_second_moment(op, x, q, 1e-11);
    CHECK(seminorm_second_moment(op, x.scaled(3.0), q, 1e-11) == doctest::Approx(9.0 * m).epsilon(1e-12));

    const auto terms = seminorm_mode_contributions(op, x, q, 1e-11);
    CHECK(terms[1] == doctest::Approx(0.25 * seminorm_mode_factor(4.0, 0.2, 1.0, 1e-11).value).epsilon(1e-12));

    // theta = 0 multiplies mode k by 1 / lambda_k.
    const auto low = seminorm_mode_contributions(op, x, RegularityQuery{0.2, 1.0, 0.0}, 1e-11);
    CHECK(low[2] == doctest::Approx(terms[2] / 9.0).epsilon(1e-12));
    CHECK(smr_second_moment(op, x, 0.2, 1.0, 1e-11) ==
          doctest::Approx(seminorm_second_moment(op, x, RegularityQuery{0.2, 1.0, 0.3}, 1e-11)).epsilon(1e-14));

    CHECK(l2_second_moment(op, x, 1.0, 0.5) ==
          doctest::Approx(l2_mode_factor(1.0, 1.0) + 0.25 * l2_mode_factor(4.0, 1.0) +
                          0.0625 * l2_mode_factor(9.0, 1.0))
              .epsilon(1e-14));
    CHECK(increment_second_moment(op, x, 0.3, 0.7, 0.5) ==
          doctest::Approx(increment_kernel(1.0, 0.3, 0.7) + 0.25 * increment_kernel(4.0, 0.3, 0.7) +
                          0.0625 * increment_kernel(9.0, 0.3, 0.7))
              .epsilon(1e-14));
}

TEST_CASE("thread count does not change the bits") {
    std::vector<double> ev;
    for (int k = 1; k <= 200; ++k) ev.push_back(double(k) * k);
    const SpectralOperator op(ev);
    const auto x = PowerFamily{1.0, 1.0, 1.0, 2.0}.make_vector(200);
    const RegularityQuery q{0.3, 1.0, 0.5};
    CHECK(seminorm_second_moment(op, x, q, 1e-10, 1) == seminorm_second_moment(op, x, q, 1e-10, 4));
}

TEST_CASE("halving the tolerance moves values within the combined tolerance") {
    const auto fam = PowerFamily{1.0, 1.5, 1.0, 2.0};
    const auto op = fam.make_operator(256);
    const auto x = fam.make_vector(256);
    const RegularityQuery q{0.35, 2.0, 0.5};
    const double a = seminorm_second_moment(op, x, q, 1e-8);
    const double b = seminorm_second_moment(op, x, q, 5e-9);
    CHECK(std::abs(a - b) <= (1e-8 + 5e-9) * std::abs(a));
}

TEST_CASE("query validation") {
    const SpectralOperator op({1.0});
    const SpectralVector x({1.0});
    CHECK_THROWS_AS(seminorm_second_moment(op, x, RegularityQuery{0.5, 1.0, 0.5}, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(seminorm_second_moment(op, x, RegularityQuery{0.0, 1.0, 0.5}, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(seminorm_second_moment(op, x, RegularityQuery{0.2, 0.0, 0.5}, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(equivalence_ratio(op, SpectralVector::zeros(1), RegularityQuery{0.2, 1.0, 0.5}, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("certificate inequalities") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    std::vector<double> ev;
    for (int k = 1; k <= 64; ++k) ev.push_back(double(k) * k);
    const SpectralOperator op(ev);
    for (double alpha : {0.1, 0.25, 0.4}) {
        for (double T : {0.25, 1.0, 4.0}) {
            std::vector<double> c(64);
            for (int k = 0; k < 64; ++k) c[k] = g(rng) / std::pow(k + 1.0, 1.0 + alpha);
            const auto cert = certificate(op, SpectralVector(c), RegularityQuery{alpha, T, 0.5}, 1e-10);
            CHECK(cert.allHold());
            CHECK(cert.seminormMoment >= cert.seminormLowerRHS);
            CHECK(cert.l2Moment >= cert.l2LowerRHS);
            CHECK(cert.fullMoment() >= cert.lowerBoundRHS);
            CHECK(cert.fullMoment() <= cert.upperBoundRHS);
            CHECK(cert.epsilon > 0.0);
            CHECK(cert.epsilon <= 1.0);
            CHECK(cert.CdeltaT == doctest::Approx(c_delta_constant(1.0, T)));
        }
    }
    CHECK_THROWS_AS(certificate(op, PowerFamily{}.make_vector(64), RegularityQuery{0.2, 1.0, 0.3}, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("truncation sweep") {
    std::vector<double> ones(1024, 1.0);
    const std::vector<std::size_t> ns{16, 32, 64, 128, 256, 512, 1024};
    const auto flat = truncation_sweep(ones, ns);
    CHECK(flat.values.back() == 1024.0);
    CHECK(*flat.partialSumSlope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*flat.incrementSlope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(flat.topRelativeChange == doctest::Approx(0.5));

    std::vector<double> decaying(1024);
    for (std::size_t k = 0; k < decaying.size(); ++k) decaying[k] = std::pow(k + 1.0, -2.0);
    const auto conv = truncation_sweep(decaying, ns);
    CHECK(*conv.incrementSlope == doctest::Approx(-1.0).epsilon(0.02));
    CHECK(conv.topRelativeChange < 1e-3);

    const std::vector<std::size_t> bad{32, 16};
    CHECK_THROWS_AS(truncation_sweep(ones, bad), std::invalid_argument);
    const std::vector<std::size_t> toolong{16, 2048};
    CHECK_THROWS_AS(truncation_sweep(ones, toolong), std::invalid_argument);

    const std::vector<double> lx{0.0, 1.0, 2.0};
    const std::vector<double> ly{1.0, 3.5, 6.0};
    CHECK(fit_slope(lx, ly) == doctest::Approx(2.5));
}
