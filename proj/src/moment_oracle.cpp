#include "sobolab/moment_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sobolab/reduction.hpp"

namespace sobolab {

namespace {

// y - 1 + e^{-y} without cancellation for small y.
double phi(double y) {
    if (y < 0.1) {
        double term = y * y / 2.0;
        double sum = term;
        for (int k = 3; k <= 12; ++k) {
            term *= -y / k;
            sum += term;
        }
        return sum;
    }
    return y + std::expm1(-y);
}

void require_alpha_open(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw std::invalid_argument("alpha must lie in (0, 1/2), got " + std::to_string(alpha));
    }
}

void require_tol(double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
}

// Inequality check allowing for the requested quadrature tolerance and rounding.
bool at_least(double lhs, double rhs, double tol) {
    const double slack = tol * std::abs(lhs) + 1e-13 * std::max(std::abs(lhs), std::abs(rhs));
    return lhs >= rhs - slack;
}

constexpr double kKomatsuCut = 60.0;

}  // namespace

void RegularityQuery::validate() const {
    if (!(alpha >= 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in [0, 1/2)");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
    if (!std::isfinite(spaceExponent)) throw std::invalid_argument("space exponent must be finite");
}

double increment_kernel(double lambda, double s, double t) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("increment times must be nonnegative");
    const double lo = std::min(s, t);
    const double tau = std::abs(t - s);
    const double one_minus_a = -std::expm1(-lambda * tau);
    const double one_minus_a2 = -std::expm1(-2.0 * lambda * tau);
    const double memory = -std::expm1(-2.0 * lambda * lo);
    return 0.5 * one_minus_a * one_minus_a * memory + 0.5 * one_minus_a2;
}

double increment_band_integral(double lambda, double tau, double horizon) {
    const double rest = horizon - tau;
    if (rest <= 0.0) return 0.0;
    const double one_minus_a = -std::expm1(-lambda * tau);
    const double one_minus_a2 = -std::expm1(-2.0 * lambda * tau);
    const double memory = phi(2.0 * lambda * rest) / (2.0 * lambda);
    return 0.5 * (one_minus_a * one_minus_a * memory + one_minus_a2 * rest);
}

double l2_mode_factor(double lambda, double horizon) { return phi(2.0 * lambda * horizon) / (4.0 * lambda); }

quadrature::QuadratureResult seminorm_mode_factor(double lambda, double alpha, double horizon, double tol,
                                                  QuadratureRoute route) {
    require_alpha_open(alpha);
    require_tol(tol);
    quadrature::WeakSingularProblem problem;
    problem.smooth = [lambda, horizon](double tau) {
        return 2.0 * increment_band_integral(lambda, tau, horizon) / tau;
    };
    problem.beta = 2.0 * alpha;
    problem.upper = horizon;
    problem.scale = lambda;
    quadrature::AdaptiveOptions opt;
    opt.relTol = tol;
    return route == QuadratureRoute::Graded ? quadrature::integrate_graded(problem, opt)
                                            : quadrature::integrate_exponential(problem, opt);
}

double increment_second_moment(const SpectralOperator& op, const SpectralVector& x, double s, double t,
                               double theta) {
    require_same_size(op, x);
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("increment times must be nonnegative");
    if (s == t) return 0.0;
    CompensatedSum acc;
    const auto ev = op.eigenvalues();
    for (std::size_t k = 0; k < ev.size(); ++k) {
        const double c = x[k];
        if (c == 0.0) continue;
        acc.add(std::pow(ev[k], 2.0 * theta - 1.0) * c * c * increment_kernel(ev[k], s, t));
    }
    return acc.value();
}

double l2_second_moment(const SpectralOperator& op, const SpectralVector& x, double horizon, double theta) {
    require_same_size(op, x);
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    CompensatedSum acc;
    const auto ev = op.eigenvalues();
    for (std::size_t k = 0; k < ev.size(); ++k) {
        const double c = x[k];
        if (c == 0.0) continue;
        acc.add(std::pow(ev[k], 2.0 * theta - 1.0) * c * c * l2_mode_factor(ev[k], horizon));
    }
    return acc.value();
}

std::vector<double> seminorm_mode_contributions(const SpectralOperator& op, const SpectralVector& x,
                                                const RegularityQuery& q, double tol, unsigned threads,
                                                QuadratureRoute route) {
    require_same_size(op, x);
    q.validate();
    require_alpha_open(q.alpha);
    require_tol(tol);
    const auto ev = op.eigenvalues();
    std::vector<double> out(ev.size(), 0.0);
    std::vector<quadrature::QuadratureResult> failures(ev.size());
    std::vector<char> failed(ev.size(), 0);
    parallel_for(ev.size(), threads, [&](std::size_t k) {
        const double c = x[k];
        if (c == 0.0) return;
        const auto r = seminorm_mode_factor(ev[k], q.alpha, q.horizon, tol, route);
        if (!r.converged) {
            failed[k] = 1;
            failures[k] = r;
            return;
        }
        out[k] = std::pow(ev[k], 2.0 * q.spaceExponent - 1.0) * c * c * r.value;
    });
    for (std::size_t k = 0; k < ev.size(); ++k) {
        if (failed[k]) {
            throw quadrature::QuadratureError("seminorm quadrature missed tolerance " + std::to_string(tol) +
                                                  " at mode " + std::to_string(k + 1) +
                                                  " (lambda = " + std::to_string(ev[k]) + ")",
                                              failures[k]);
        }
    }
    return out;
}

double seminorm_second_moment(const SpectralOperator& op, const SpectralVector& x, const RegularityQuery& q,
                              double tol, unsigned threads) {
    const auto terms = seminorm_mode_contributions(op, x, q, tol, threads);
    return compensated_sum(terms);
}

double smr_second_moment(const SpectralOperator& op, const SpectralVector& x, double alpha, double horizon,
                         double tol, unsigned threads) {
    RegularityQuery q{alpha, horizon, 0.5 - alpha};
    return seminorm_second_moment(op, x, q, tol, threads);
}

double komatsu_closed_form(double alpha) {
    require_alpha_open(alpha);
    return std::tgamma(1.0 - 2.0 * alpha) / (2.0 * alpha);
}

double komatsu_constant(double alpha, double tol) {
    require_alpha_open(alpha);
    require_tol(tol);
    // Split at s = 60: beyond it 1 - e^{-s} = 1 up to e^{-60}, and the power
    // tail integrates exactly.
    quadrature::WeakSingularProblem problem;
    problem.smooth = [](double s) { return -std::expm1(-s) / s; };
    problem.beta = 2.0 * alpha;
    problem.upper = kKomatsuCut;
    problem.scale = 1.0;
    quadrature::AdaptiveOptions opt;
    opt.relTol = 0.1 * tol;
    const auto head = quadrature::integrate_graded(problem, opt);
    const double tail = std::pow(kKomatsuCut, -2.0 * alpha) / (2.0 * alpha);
    const double value = head.value + tail;
    if (!head.converged || !(head.errorEstimate <= tol * value)) {
        throw quadrature::QuadratureError("Komatsu quadrature missed tolerance at alpha = " + std::to_string(alpha),
                                          head);
    }
    return value;
}

double c_alpha_constant(double alpha, double komatsu) { return std::pow(2.0, 2.0 * alpha - 2.0) * komatsu; }

double theta_alpha_constant(double alpha, double horizon) {
    require_alpha_open(alpha);
    return std::pow(2.0, 2.0 * alpha - 3.0) * std::pow(horizon, -2.0 * alpha) / alpha;
}

double c_delta_constant(double gap, double horizon) { return phi(2.0 * gap * horizon) / (4.0 * gap); }

CertificateReport certificate(const SpectralOperator& op, const SpectralVector& x, const RegularityQuery& q,
                              double tol, unsigned threads) {
    require_same_size(op, x);
    q.validate();
    require_alpha_open(q.alpha);
    if (q.spaceExponent != 0.5) throw std::invalid_argument("certificate is defined for the D(A^{1/2}) scale only");

    CertificateReport r;
    r.truncation = op.size();
    r.alpha = q.alpha;
    r.horizon = q.horizon;
    r.quadratureTolerance = tol;

    r.seminormMoment = seminorm_second_moment(op, x, q, tol, threads);
    r.l2Moment = l2_second_moment(op, x, q.horizon, 0.5);
    r.fracNorm = fractional_norm(op, x, q.alpha);
    r.xNorm = fractional_norm(op, x, 0.0);

    const double T = q.horizon;
    r.KAlpha = komatsu_constant(q.alpha, std::min(tol, 1e-10));
    r.cAlpha = c_alpha_constant(q.alpha, r.KAlpha);
    r.thetaAlphaT = theta_alpha_constant(q.alpha, T);
    r.CdeltaT = c_delta_constant(op.gap(), T);
    r.epsilon = std::min(r.CdeltaT / (2.0 * T * r.thetaAlphaT), 1.0);

    const double frac2 = r.fracNorm * r.fracNorm;
    const double x2 = r.xNorm * r.xNorm;
    r.seminormLowerRHS = T * r.cAlpha * frac2 - T * r.thetaAlphaT * x2;
    r.l2LowerRHS = r.CdeltaT * x2;
    r.lowerBoundRHS = r.epsilon * T * r.cAlpha * frac2 + (r.CdeltaT - r.epsilon * T * r.thetaAlphaT) * x2;
    r.upperBoundRHS = 2.0 * T * r.KAlpha * frac2 + 0.5 * T * x2;

    r.seminormLowerHolds = at_least(r.seminormMoment, r.seminormLowerRHS, tol);
    r.l2LowerHolds = at_least(r.l2Moment, r.l2LowerRHS, 0.0);
    r.lowerBoundHolds = at_least(r.fullMoment(), r.lowerBoundRHS, tol);
    r.upperBoundHolds = at_least(r.upperBoundRHS, r.fullMoment(), tol);
    return r;
}

double equivalence_ratio(const SpectralOperator& op, const SpectralVector& x, const RegularityQuery& q, double tol,
                         unsigned threads) {
    require_same_size(op, x);
    if (x.is_zero()) throw std::invalid_argument("equivalence ratio is undefined for the zero vector");
    if (q.spaceExponent != 0.5) throw std::invalid_argument("equivalence ratio is defined for the D(A^{1/2}) scale");
    const double frac = fractional_norm(op, x, q.alpha);
    if (!(frac > 0.0)) throw std::invalid_argument("fractional norm vanished");
    const double semi = seminorm_second_moment(op, x, q, tol, threads);
    const double l2 = l2_second_moment(op, x, q.horizon, 0.5);
    return std::sqrt(semi + l2) / frac;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct abscissae");
    return sxy / sxx;
}

TruncationSweep truncation_sweep(std::span<const double> contributions, std::span<const std::size_t> truncations) {
    if (truncations.empty()) throw std::invalid_argument("empty truncation list");
    for (std::size_t i = 0; i < truncations.size(); ++i) {
        if (truncations[i] == 0 || truncations[i] > contributions.size() ||
            (i > 0 && truncations[i] <= truncations[i - 1])) {
            throw std::invalid_argument("truncations must be increasing and within the available modes");
        }
    }
    TruncationSweep out;
    out.truncations.assign(truncations.begin(), truncations.end());
    CompensatedSum acc;
    std::size_t next = 0;
    for (std::size_t k = 0; k < contributions.size() && next < truncations.size(); ++k) {
        acc.add(contributions[k]);
        if (k + 1 == truncations[next]) {
            out.values.push_back(acc.value());
            ++next;
        }
    }
    const std::size_t m = out.values.size();
    if (m >= 2) {
        const double last = out.values[m - 1];
        const double prev = out.values[m - 2];
        out.topRelativeChange = last != 0.0 ? std::abs(last - prev) / std::abs(last) : 0.0;
    }

    if (m >= 2 && std::all_of(out.values.begin(), out.values.end(), [](double v) { return v > 0.0; })) {
        std::vector<double> lx(m);
        std::vector<double> ly(m);
        for (std::size_t i = 0; i < m; ++i) {
            lx[i] = std::log(static_cast<double>(out.truncations[i]));
            ly[i] = std::log(out.values[i]);
        }
        out.partialSumSlope = fit_slope(lx, ly);
    }

    if (m >= 3) {
        const double ratio = static_cast<double>(out.truncations[1]) / static_cast<double>(out.truncations[0]);
        bool geometric = true;
        bool positive = true;
        std::vector<double> lx;
        std::vector<double> ly;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double r = static_cast<double>(out.truncations[i + 1]) / static_cast<double>(out.truncations[i]);
            if (std::abs(r - ratio) > 1e-12 * ratio) geometric = false;
            const double inc = out.values[i + 1] - out.values[i];
            if (!(inc > 0.0)) positive = false;
            lx.push_back(std::log(static_cast<double>(out.truncations[i])));
            ly.push_back(std::log(inc));
        }
        if (geometric && positive) out.incrementSlope = fit_slope(lx, ly);
    }
    return out;
}

}  // namespace sobolab
