#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sobolab/spectral_core.hpp"

namespace sobolab {

/// Uniform grid t_i = i * T / n, i = 0..n.
class TimeGrid {
public:
    /// Throws std::invalid_argument unless horizon > 0 and steps >= 2.
    TimeGrid(double horizon, std::size_t steps);

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t points() const noexcept { return steps_ + 1; }
    [[nodiscard]] double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
    [[nodiscard]] double time(std::size_t i) const noexcept {
        return horizon_ * static_cast<double>(i) / static_cast<double>(steps_);
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double horizon_;
    std::size_t steps_;
};

class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FactorMethod { Cholesky, PivotedLDLT, JitteredCholesky };

const char* to_string(FactorMethod m) noexcept;

/// Covariance of the per-step innovations
///   xi_k = int_{t_i}^{t_{i+1}} e^{-lambda_k (t_{i+1} - r)} dbeta(r),
/// C_kj = (1 - e^{-(lambda_k + lambda_j) dt}) / (lambda_k + lambda_j),
/// with a factor L such that L L^T reproduces C.
struct StepCovariance {
    double dt = 0.0;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd factor;
    FactorMethod method = FactorMethod::Cholesky;
    /// Diagonal shift actually added, as a multiple of max diag(C); 0 unless jittered.
    double jitter = 0.0;
    /// max |L L^T - C| / max |C|, measured against the unjittered C.
    double residual = 0.0;
};

/// Throws FactorizationError when no factor reaches the residual bound
/// 1e-10 max|C| and the jitter ladder 1e-14 .. 1e-8 is exhausted.
StepCovariance step_covariance(const SpectralOperator& op, double dt);

/// Sampled solution coefficients. Layout is path-major, time-major,
/// mode-minor: value(p, i, k) = values[(p * points + i) * modes + k].
struct PathEnsemble {
    TimeGrid grid{1.0, 2};
    std::size_t modes = 0;
    std::size_t nPaths = 0;
    std::uint64_t seed = 0;
    std::vector<double> values;

    [[nodiscard]] std::span<const double> path(std::size_t p) const {
        const std::size_t stride = grid.points() * modes;
        return std::span<const double>(values).subspan(p * stride, stride);
    }
    [[nodiscard]] double value(std::size_t p, std::size_t i, std::size_t k) const {
        return values[(p * grid.points() + i) * modes + k];
    }
};

/// Exact sampler of u(t) = int_0^t e^{-(t-r)A} x dbeta(r) on a uniform grid:
/// u_k(t_{i+1}) = e^{-lambda_k dt} u_k(t_i) + x_k (L z_i)_k with z_i drawn from
/// the counter-based stream at (seed, path, i). The factor is computed once.
class PathSampler {
public:
    PathSampler(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid, std::uint64_t seed);

    /// Writes grid.points() * modes values for path `index` into `out`.
    void sample(std::uint64_t index, std::span<double> out) const;

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t modes() const noexcept { return decay_.size(); }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] const StepCovariance& step() const noexcept { return step_; }

private:
    TimeGrid grid_;
    std::uint64_t seed_;
    StepCovariance step_;
    Eigen::VectorXd decay_;
    Eigen::MatrixXd scaledFactor_;  // diag(x) L
    bool zero_ = false;
};

PathEnsemble sample_paths(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid,
                          std::size_t nPaths, std::uint64_t seed, unsigned threads = 1);

/// Fills paths [first, first + count) of an ensemble whose buffer is already
/// sized; any partition of the path range produces the same values.
void sample_path_range(const PathSampler& sampler, PathEnsemble& ensemble, std::size_t first, std::size_t count);

/// Entry (k, j) = E[u_k(t) u_j(s)]; for s <= t this is
/// x_k x_j e^{-lambda_k (t - s)} (1 - e^{-(lambda_k + lambda_j) s}) / (lambda_k + lambda_j).
Eigen::MatrixXd exact_marginal_covariance(const SpectralOperator& op, const SpectralVector& x, double s, double t);

}  // namespace sobolab
