#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sobolab/moment_oracle.hpp"
#include "sobolab/spectral_core.hpp"

namespace sobolab::dirichlet {

/// The interval (0, L).
struct IntervalDomain {
    double length = 1.0;
    void validate() const;
};

/// Samples h(s_i), s_i = i L / m, i = 0..m.
struct GridFunction {
    std::vector<double> samples;

    [[nodiscard]] std::size_t intervals() const noexcept { return samples.empty() ? 0 : samples.size() - 1; }
    /// Requires finite samples and m >= 8.
    void validate() const;
};

/// Named analytic profiles: "one" (h = 1), "sine" (h = sin(pi s / L)),
/// "hat" (tent with peak 1 at L/2).
enum class Profile { One, Sine, Hat };

Profile profile_from_string(const std::string& name);
const char* to_string(Profile p) noexcept;

/// Eigenvalues (k pi / L)^2, k = 1..nModes, of the Dirichlet Laplacian.
SpectralOperator dirichlet_operator(const IntervalDomain& domain, std::size_t nModes);

/// x_k = int_0^L h(s) sqrt(2/L) sin(k pi s / L) ds by composite Simpson on
/// the sample grid. m must be even and nModes <= m / 2.
SpectralVector sine_coefficients(const GridFunction& h, const IntervalDomain& domain, std::size_t nModes);

/// Closed-form coefficients of a named profile.
SpectralVector profile_coefficients(Profile p, const IntervalDomain& domain, std::size_t nModes);

/// Samples a named profile on m + 1 uniform points.
GridFunction sample_profile(Profile p, const IntervalDomain& domain, std::size_t intervals);

/// Reads a two-column (position, value) CSV with uniformly spaced positions
/// covering [0, L]; an optional non-numeric header line is skipped.
GridFunction read_profile_csv(const std::filesystem::path& file, const IntervalDomain& domain);

enum class Verdict { FiniteStable, Diverging };
const char* to_string(Verdict v) noexcept;

struct ThresholdVerdict {
    double alpha = 0.0;
    Verdict verdict = Verdict::FiniteStable;
    TruncationSweep sweep;
    /// Slope reported for diverging sweeps.
    std::optional<double> slope;
};

/// For each alpha, sweeps the seminorm moment over the truncations. A sweep is
/// finite-stable when the top two values differ by less than `tol`
/// relatively and the dyadic increments do not grow; otherwise it is
/// diverging, reported with the increment slope.
std::vector<ThresholdVerdict> threshold_scan(const SpectralVector& coefficients, const IntervalDomain& domain,
                                             const std::vector<double>& alphas, double horizon,
                                             const std::vector<std::size_t>& truncations, double tol,
                                             double quadratureTol, unsigned threads = 1);

/// Verdict rule shared with the CLI sweeps.
Verdict classify_sweep(const TruncationSweep& sweep, double tol);

}  // namespace sobolab::dirichlet
