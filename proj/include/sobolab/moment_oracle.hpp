#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sobolab/quadrature.hpp"
#include "sobolab/spectral_core.hpp"

namespace sobolab {

/// Which norm E|u|^2_{W^{alpha,2}(0,T; D(A^theta))} is requested.
struct RegularityQuery {
    double alpha = 0.25;
    double horizon = 1.0;
    /// theta = 1/2 for the regularity theorem, theta = 1/2 - alpha for the
    /// mixed space-time scale.
    double spaceExponent = 0.5;

    /// Throws std::invalid_argument unless 0 <= alpha < 1/2 and horizon > 0.
    void validate() const;
};

enum class QuadratureRoute { Graded, Exponential };

// ---------------------------------------------------------------------------
// Closed-form per-mode kernels. All of them carry the D(A^{1/2}) weight, so
// the contribution of mode k in D(A^theta) is lambda_k^{2 theta - 1} x_k^2
// times the kernel.

/// E|A^{1/2}(u(t) - u(s))|^2 for one mode with unit coefficient, both Ito
/// integrals of the increment decomposition kept:
/// 1/2 (1-a)^2 (1 - e^{-2 lambda min(s,t)}) + 1/2 (1 - a^2),  a = e^{-lambda |t-s|}.
double increment_kernel(double lambda, double s, double t);

/// Integral over s in [0, T - tau] of increment_kernel(lambda, s, s + tau).
double increment_band_integral(double lambda, double tau, double horizon);

/// E|A^{1/2} u|^2_{L^2(0,T)} for one unit mode: T/2 - (1 - e^{-2 lambda T}) / (4 lambda).
double l2_mode_factor(double lambda, double horizon);

/// 2 * int_0^T tau^{-1-2 alpha} increment_band_integral(lambda, tau, T) dtau.
quadrature::QuadratureResult seminorm_mode_factor(double lambda, double alpha, double horizon, double tol,
                                                  QuadratureRoute route = QuadratureRoute::Graded);

// ---------------------------------------------------------------------------

double increment_second_moment(const SpectralOperator& op, const SpectralVector& x, double s, double t,
                               double theta);

double l2_second_moment(const SpectralOperator& op, const SpectralVector& x, double horizon, double theta);

/// Per-mode terms of E[u]^2_{W^{alpha,2}(0,T;D(A^theta))} in ascending mode
/// order. Throws QuadratureError if any mode misses `tol`.
std::vector<double> seminorm_mode_contributions(const SpectralOperator& op, const SpectralVector& x,
                                                const RegularityQuery& q, double tol, unsigned threads = 1,
                                                QuadratureRoute route = QuadratureRoute::Graded);

/// E[u]^2_{W^{alpha,2}(0,T;D(A^theta))}; alpha must lie in (0, 1/2).
double seminorm_second_moment(const SpectralOperator& op, const SpectralVector& x, const RegularityQuery& q,
                              double tol, unsigned threads = 1);

/// Seminorm moment in the mixed scale D(A^{1/2 - alpha}).
double smr_second_moment(const SpectralOperator& op, const SpectralVector& x, double alpha, double horizon,
                         double tol, unsigned threads = 1);

/// K_alpha = int_0^inf (1 - e^{-s}) s^{-1-2 alpha} ds by quadrature.
double komatsu_constant(double alpha, double tol);
/// Gamma(1 - 2 alpha) / (2 alpha).
double komatsu_closed_form(double alpha);

/// Constants of the lower-bound argument together with both sides of every
/// inequality, for one (A, x, alpha, T) with theta = 1/2.
struct CertificateReport {
    std::size_t truncation = 0;
    double alpha = 0.0;
    double horizon = 0.0;

    double seminormMoment = 0.0;
    double l2Moment = 0.0;
    double fracNorm = 0.0;
    double xNorm = 0.0;

    double cAlpha = 0.0;
    double KAlpha = 0.0;
    double thetaAlphaT = 0.0;
    double CdeltaT = 0.0;
    double epsilon = 0.0;

    /// T c_alpha |A^alpha x|^2 - T theta_{alpha,T} |x|^2, compared with seminormMoment.
    double seminormLowerRHS = 0.0;
    /// C_{delta,T} |x|^2, compared with l2Moment.
    double l2LowerRHS = 0.0;
    /// eps T c_alpha |A^alpha x|^2 + (C_{delta,T} - eps T theta_{alpha,T}) |x|^2.
    double lowerBoundRHS = 0.0;
    /// 2 T K_alpha |A^alpha x|^2 + T/2 |x|^2, from 1 - e^{-lambda tau} bounding each increment.
    double upperBoundRHS = 0.0;

    bool seminormLowerHolds = false;
    bool l2LowerHolds = false;
    bool lowerBoundHolds = false;
    bool upperBoundHolds = false;

    double quadratureTolerance = 0.0;

    [[nodiscard]] double fullMoment() const noexcept { return seminormMoment + l2Moment; }
    [[nodiscard]] bool allHold() const noexcept {
        return seminormLowerHolds && l2LowerHolds && lowerBoundHolds && upperBoundHolds;
    }
};

double c_alpha_constant(double alpha, double komatsu);
/// 2^{2 alpha - 3} T^{-2 alpha} / alpha.
double theta_alpha_constant(double alpha, double horizon);
/// T/2 - (1 - e^{-2 T delta}) / (4 delta).
double c_delta_constant(double gap, double horizon);

CertificateReport certificate(const SpectralOperator& op, const SpectralVector& x, const RegularityQuery& q,
                              double tol, unsigned threads = 1);

/// (seminorm + L^2 moment)^{1/2} / |A^alpha x|.
double equivalence_ratio(const SpectralOperator& op, const SpectralVector& x, const RegularityQuery& q, double tol,
                         unsigned threads = 1);

/// Partial sums of per-mode contributions over increasing truncations.
struct TruncationSweep {
    std::vector<std::size_t> truncations;
    std::vector<double> values;
    /// |S(N_last) - S(N_prev)| / |S(N_last)|.
    double topRelativeChange = 0.0;
    /// Least-squares slope of log S(N) against log N.
    std::optional<double> partialSumSlope;
    /// Least-squares slope of log(S(N_{i+1}) - S(N_i)) against log N_i; needs
    /// a geometric truncation list. Matches the partial-sum growth exponent
    /// for divergent power tails and the (negative) tail exponent otherwise.
    std::optional<double> incrementSlope;
};

/// `truncations` must be strictly increasing and not exceed contributions.size().
TruncationSweep truncation_sweep(std::span<const double> contributions, std::span<const std::size_t> truncations);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace sobolab
