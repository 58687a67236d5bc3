#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sobolab/path_sampler.hpp"
#include "sobolab/spectral_core.hpp"

namespace sobolab {

enum class KernelScheme {
    /// w_d = exact integral of |t-s|^{-1-2 alpha} over two cells d apart.
    CellExact,
    /// w_d = dt^2 (d dt)^{-1-2 alpha}, the midpoint kernel value.
    DiagonalExcluded,
};

const char* to_string(KernelScheme s) noexcept;
/// Accepts "cell-exact" and "diagonal-excluded".
KernelScheme kernel_scheme_from_string(const std::string& name);

/// Translation-invariant weights of the discrete seminorm on `cells` uniform
/// cells; weight(0) is zero because a piecewise-constant path has no
/// increment inside a cell.
class KernelWeights {
public:
    KernelWeights(double alpha, double dt, std::size_t cells, KernelScheme scheme);

    [[nodiscard]] double weight(std::size_t distance) const { return weights_.at(distance); }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] std::size_t cells() const noexcept { return weights_.size(); }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] KernelScheme scheme() const noexcept { return scheme_; }

private:
    double alpha_;
    double dt_;
    KernelScheme scheme_;
    std::vector<double> weights_;
};

/// Closed-form cell integral for cells `distance` >= 1 apart.
double cell_kernel_integral(double alpha, double dt, std::size_t distance);

/// lambda_k^{2 theta}, the D(A^theta) weight of each mode.
std::vector<double> space_weights(const SpectralOperator& op, double theta);

/// Sum over i != j of w_{|i-j|} |v_i - v_j|^2_{D(A^theta)} using cell values
/// v_0..v_{cells-1}. `path` holds at least cells * modes values (time-major).
/// Short lags are summed directly; long lags go through an FFT
/// autocorrelation.
double discrete_seminorm(std::span<const double> path, std::size_t modes, const KernelWeights& weights,
                         std::span<const double> spaceWeights);

/// Convenience overload on a full grid path of grid.points() * modes values.
double discrete_seminorm(std::span<const double> path, const TimeGrid& grid, double alpha,
                         const SpectralOperator& op, double theta, KernelScheme scheme = KernelScheme::CellExact);

/// Trapezoidal int_0^T |v(t)|^2_{D(A^theta)} dt on the grid values.
double discrete_l2(std::span<const double> path, std::size_t modes, double dt, std::span<const double> spaceWeights);

/// Every second grid point of a path: the same path on the grid with half the steps.
std::vector<double> coarsen_path(std::span<const double> path, std::size_t modes);

struct SeminormEstimate {
    double mean = 0.0;
    double stdError = 0.0;
    std::size_t nPaths = 0;
    double alpha = 0.0;
    double theta = 0.0;
    KernelScheme kernelScheme = KernelScheme::CellExact;
};

/// Mean and standard error with a fixed summation order.
SeminormEstimate summarize(std::span<const double> samples);

SeminormEstimate mc_seminorm(const PathEnsemble& ensemble, double alpha, const SpectralOperator& op, double theta,
                             KernelScheme scheme = KernelScheme::CellExact, unsigned threads = 1);

SeminormEstimate mc_l2(const PathEnsemble& ensemble, const SpectralOperator& op, double theta, unsigned threads = 1);

/// Paired estimate on a grid and on its every-second-point subgrid.
struct RefinedEstimate {
    SeminormEstimate fine;
    SeminormEstimate coarse;
    /// Assumed convergence order of the estimator bias in dt.
    double order = 1.0;
    /// Bias of the fine estimate extrapolated from the pair: (coarse - fine) / (2^order - 1).
    double bias = 0.0;
    double biasStdError = 0.0;
    /// fine - bias, with the standard error of the paired per-path combination.
    SeminormEstimate extrapolated;
};

RefinedEstimate refine(std::span<const double> fine, std::span<const double> coarse, double order,
                       const SeminormEstimate& tag);

/// Per-path functionals of one Monte Carlo run, evaluated while sampling so
/// that the ensemble never has to be held in memory.
struct PathFunctionals {
    std::vector<double> seminormFine;
    std::vector<double> seminormCoarse;
    std::vector<double> l2Fine;
    std::vector<double> l2Coarse;
};

PathFunctionals stream_functionals(const PathSampler& sampler, std::size_t nPaths, double alpha,
                                   const SpectralOperator& op, double theta, KernelScheme scheme, unsigned threads = 1);

/// The same functionals evaluated on a stored ensemble.
PathFunctionals ensemble_functionals(const PathEnsemble& ensemble, double alpha, const SpectralOperator& op,
                                     double theta, KernelScheme scheme, unsigned threads = 1);

/// Bias order used for grid-doubling extrapolation of the seminorm estimator.
/// The bias has a dt^{2 - 2 alpha} part from the diagonal cells and a dt part
/// from the piecewise-constant path; the latter wins as dt -> 0, so this is 1
/// for every alpha. While the first part is still visible the local rate lies
/// in [1, 2 - 2 alpha] and order 1 overstates the bias.
double seminorm_bias_order(double alpha);
/// Bias order of the trapezoidal L^2 estimator.
inline constexpr double kL2BiasOrder = 2.0;

/// Exact expectation of discrete_seminorm for the true solution law.
double expected_discrete_seminorm(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid,
                                  double alpha, double theta, KernelScheme scheme = KernelScheme::CellExact);

/// Exact expectation of discrete_l2 for the true solution law.
double expected_discrete_l2(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid, double theta);

struct GateResult {
    bool pass = false;
    double deviation = 0.0;  ///< |mean - oracle|
    double allowance = 0.0;  ///< kSigma * stdError + bias * |oracle|
    [[nodiscard]] double margin() const noexcept { return allowance - deviation; }
};

/// Pass iff |mean - oracle| <= kSigma * stdError + bias * |oracle|, where
/// `bias` is a relative allowance.
GateResult oracle_gate(const SeminormEstimate& estimate, double oracleValue, double kSigma, double bias);

}  // namespace sobolab
