#include "sobolab/path_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sobolab/philox.hpp"
#include "sobolab/reduction.hpp"

namespace sobolab {

namespace {

constexpr double kResidualBound = 1e-10;
constexpr double kJitterStart = 1e-14;
constexpr double kJitterMax = 1e-8;

double relative_residual(const Eigen::MatrixXd& factor, const Eigen::MatrixXd& c) {
    const double scale = c.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (factor * factor.transpose() - c).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("grid horizon must be positive");
    if (steps < 2) throw std::invalid_argument("grid needs at least two steps");
}

const char* to_string(FactorMethod m) noexcept {
    switch (m) {
        case FactorMethod::Cholesky: return "cholesky";
        case FactorMethod::PivotedLDLT: return "pivoted-ldlt";
        case FactorMethod::JitteredCholesky: return "jittered-cholesky";
    }
    return "unknown";
}

StepCovariance step_covariance(const SpectralOperator& op, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step must be positive");
    const auto ev = op.eigenvalues();
    const auto n = static_cast<Eigen::Index>(ev.size());
    StepCovariance out;
    out.dt = dt;
    out.covariance.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double rate = ev[static_cast<std::size_t>(k)] + ev[static_cast<std::size_t>(j)];
            out.covariance(k, j) = -std::expm1(-rate * dt) / rate;
        }
    }
    const Eigen::MatrixXd& c = out.covariance;

    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd l = llt.matrixL();
        const double res = relative_residual(l, c);
        if (res <= kResidualBound) {
            out.factor = std::move(l);
            out.method = FactorMethod::Cholesky;
            out.residual = res;
            return out;
        }
    }

    // Semidefinite route: C = P^T L D L^T P with pivoting; rounding can leave
    // tiny negative pivots, which are clamped.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
    if (ldlt.info() == Eigen::Success) {
        const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
        Eigen::MatrixXd lower = ldlt.matrixL();
        Eigen::MatrixXd f = ldlt.transpositionsP().transpose() * (lower * d.asDiagonal());
        const double res = relative_residual(f, c);
        if (res <= kResidualBound) {
            out.factor = std::move(f);
            out.method = FactorMethod::PivotedLDLT;
            out.residual = res;
            return out;
        }
    }

    const double diag_max = c.diagonal().maxCoeff();
    for (double eta = kJitterStart; eta <= kJitterMax * (1.0 + 1e-12); eta *= 2.0) {
        Eigen::MatrixXd shifted = c;
        shifted.diagonal().array() += eta * diag_max;
        Eigen::LLT<Eigen::MatrixXd> jl(shifted);
        if (jl.info() != Eigen::Success) continue;
        Eigen::MatrixXd l = jl.matrixL();
        out.factor = std::move(l);
        out.method = FactorMethod::JitteredCholesky;
        out.jitter = eta;
        out.residual = relative_residual(out.factor, c);
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "step covariance factorization failed after jitter " << kJitterMax << ": modes=" << n
        << " min eigenvalue=" << es.eigenvalues().minCoeff() << " max eigenvalue=" << es.eigenvalues().maxCoeff()
        << " smallest eigenvalue gap=";
    double gap = ev.size() > 1 ? ev[1] - ev[0] : 0.0;
    for (std::size_t k = 1; k < ev.size(); ++k) gap = std::min(gap, ev[k] - ev[k - 1]);
    msg << gap;
    throw FactorizationError(msg.str());
}

PathSampler::PathSampler(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid, std::uint64_t seed)
    : grid_(grid), seed_(seed), step_(step_covariance(op, grid.dt())) {
    require_same_size(op, x);
    const auto n = static_cast<Eigen::Index>(op.size());
    decay_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) decay_(k) = std::exp(-op.eigenvalue(static_cast<std::size_t>(k)) * grid.dt());
    Eigen::VectorXd coeff(n);
    for (Eigen::Index k = 0; k < n; ++k) coeff(k) = x[static_cast<std::size_t>(k)];
    scaledFactor_ = coeff.asDiagonal() * step_.factor;
    zero_ = x.is_zero();
}

void PathSampler::sample(std::uint64_t index, std::span<double> out) const {
    const std::size_t n = modes();
    const std::size_t points = grid_.points();
    if (out.size() != n * points) throw std::invalid_argument("path buffer has the wrong size");
    std::fill(out.begin(), out.end(), 0.0);
    if (zero_) return;

    const GaussianStream stream(seed_);
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    Eigen::VectorXd state = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i + 1 < points; ++i) {
        stream.fill(index, i, std::span<double>(z.data(), n));
        state = decay_.cwiseProduct(state) + scaledFactor_ * z;
        std::copy(state.data(), state.data() + n, out.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    }
}

void sample_path_range(const PathSampler& sampler, PathEnsemble& ensemble, std::size_t first, std::size_t count) {
    const std::size_t stride = ensemble.grid.points() * ensemble.modes;
    if (ensemble.values.size() != ensemble.nPaths * stride || first + count > ensemble.nPaths) {
        throw std::invalid_argument("ensemble buffer does not cover the requested path range");
    }
    for (std::size_t p = first; p < first + count; ++p) {
        sampler.sample(p, std::span<double>(ensemble.values).subspan(p * stride, stride));
    }
}

PathEnsemble sample_paths(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid,
                          std::size_t nPaths, std::uint64_t seed, unsigned threads) {
    if (nPaths == 0) throw std::invalid_argument("ensemble needs at least one path");
    const PathSampler sampler(op, x, grid, seed);
    PathEnsemble e;
    e.grid = grid;
    e.modes = op.size();
    e.nPaths = nPaths;
    e.seed = seed;
    e.values.assign(nPaths * grid.points() * e.modes, 0.0);
    parallel_for(nPaths, threads, [&](std::size_t p) { sample_path_range(sampler, e, p, 1); });
    return e;
}

Eigen::MatrixXd exact_marginal_covariance(const SpectralOperator& op, const SpectralVector& x, double s, double t) {
    require_same_size(op, x);
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("covariance times must be nonnegative");
    const auto ev = op.eigenvalues();
    const auto n = static_cast<Eigen::Index>(ev.size());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double lk = ev[static_cast<std::size_t>(k)];
            const double lj = ev[static_cast<std::size_t>(j)];
            const double rate = lk + lj;
            const double common = std::min(s, t);
            // The later time carries the extra decay of its own mode.
            const double decay = t >= s ? std::exp(-lk * (t - s)) : std::exp(-lj * (s - t));
            cov(k, j) = x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)] * decay *
                        (-std::expm1(-rate * common)) / rate;
        }
    }
    return cov;
}

}  // namespace sobolab
