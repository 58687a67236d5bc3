#include "sobolab/empirical_norms.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "sobolab/moment_oracle.hpp"
#include "sobolab/reduction.hpp"

namespace sobolab {

namespace {

// Lags up to this distance are summed directly; beyond it the increment sum
// is assembled from energies and an autocorrelation, whose cancellation is
// harmless once increments are not small against the path values.
constexpr std::size_t kDirectLags = 64;

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 1/2)");
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

const char* to_string(KernelScheme s) noexcept {
    return s == KernelScheme::CellExact ? "cell-exact" : "diagonal-excluded";
}

KernelScheme kernel_scheme_from_string(const std::string& name) {
    if (name == "cell-exact") return KernelScheme::CellExact;
    if (name == "diagonal-excluded") return KernelScheme::DiagonalExcluded;
    throw std::invalid_argument("unknown kernel scheme '" + name + "'");
}

double cell_kernel_integral(double alpha, double dt, std::size_t distance) {
    require_alpha(alpha);
    if (distance == 0) throw std::invalid_argument("cell integral is infinite on the diagonal");
    const double beta = 2.0 * alpha;
    const double p = 1.0 - beta;
    const double d = static_cast<double>(distance);
    // Second difference of r^{1-beta}: 2 d^p - (d+1)^p - (d-1)^p, written
    // through expm1/log1p so that large distances keep full precision.
    double second_difference;
    if (distance == 1) {
        second_difference = 2.0 - std::pow(2.0, p);
    } else {
        second_difference =
            -std::pow(d, p) * (std::expm1(p * std::log1p(1.0 / d)) + std::expm1(p * std::log1p(-1.0 / d)));
    }
    return std::pow(dt, p) * second_difference / (beta * p);
}

KernelWeights::KernelWeights(double alpha, double dt, std::size_t cells, KernelScheme scheme)
    : alpha_(alpha), dt_(dt), scheme_(scheme), weights_(cells, 0.0) {
    require_alpha(alpha);
    if (!(dt > 0.0)) throw std::invalid_argument("cell width must be positive");
    if (cells < 1) throw std::invalid_argument("need at least one cell");
    for (std::size_t d = 1; d < cells; ++d) {
        weights_[d] = scheme == KernelScheme::CellExact
                          ? cell_kernel_integral(alpha, dt, d)
                          : dt * dt * std::pow(static_cast<double>(d) * dt, -1.0 - 2.0 * alpha);
    }
}

std::vector<double> space_weights(const SpectralOperator& op, double theta) {
    std::vector<double> w(op.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::pow(op.eigenvalue(k), 2.0 * theta);
    return w;
}

double discrete_seminorm(std::span<const double> path, std::size_t modes, const KernelWeights& weights,
                         std::span<const double> spaceWeights) {
    const std::size_t n = weights.cells();
    if (spaceWeights.size() != modes) throw std::invalid_argument("space weights do not match the mode count");
    if (path.size() < n * modes) throw std::invalid_argument("path is shorter than the cell count");

    std::vector<double> y(n * modes);
    std::vector<double> scale(modes);
    for (std::size_t k = 0; k < modes; ++k) scale[k] = std::sqrt(spaceWeights[k]);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < modes; ++k) y[i * modes + k] = scale[k] * path[i * modes + k];
    }

    std::vector<double> lag_sums(n, 0.0);
    const std::size_t direct = std::min(n - 1, kDirectLags);
    for (std::size_t d = 1; d <= direct; ++d) {
        double s = 0.0;
        for (std::size_t i = 0; i + d < n; ++i) {
            const double* a = &y[(i + d) * modes];
            const double* b = &y[i * modes];
            for (std::size_t k = 0; k < modes; ++k) {
                const double diff = a[k] - b[k];
                s += diff * diff;
            }
        }
        lag_sums[d] = s;
    }

    if (n - 1 > direct) {
        std::vector<double> prefix(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double e = 0.0;
            for (std::size_t k = 0; k < modes; ++k) e += y[i * modes + k] * y[i * modes + k];
            prefix[i + 1] = prefix[i] + e;
        }
        const std::size_t len = next_pow2(2 * n);
        thread_local Eigen::FFT<double> fft;
        std::vector<double> column(len, 0.0);
        std::vector<std::complex<double>> spectrum;
        std::vector<std::complex<double>> power(len, 0.0);
        for (std::size_t k = 0; k < modes; ++k) {
            if (scale[k] == 0.0) continue;
            std::fill(column.begin(), column.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) column[i] = y[i * modes + k];
            fft.fwd(spectrum, column);
            for (std::size_t f = 0; f < len; ++f) power[f] += std::norm(spectrum[f]);
        }
        std::vector<double> autocorr;
        fft.inv(autocorr, power);
        for (std::size_t d = direct + 1; d < n; ++d) {
            const double tail = prefix[n] - prefix[d];  // sum over i >= d
            const double head = prefix[n - d];          // sum over i < n - d
            lag_sums[d] = tail + head - 2.0 * autocorr[d];
        }
    }

    CompensatedSum acc;
    for (std::size_t d = 1; d < n; ++d) acc.add(weights.weight(d) * lag_sums[d]);
    return 2.0 * acc.value();
}

double discrete_seminorm(std::span<const double> path, const TimeGrid& grid, double alpha, const SpectralOperator& op,
                         double theta, KernelScheme scheme) {
    if (path.size() != grid.points() * op.size()) throw std::invalid_argument("path does not match grid and operator");
    const KernelWeights w(alpha, grid.dt(), grid.steps(), scheme);
    const auto sw = space_weights(op, theta);
    return discrete_seminorm(path, op.size(), w, sw);
}

double discrete_l2(std::span<const double> path, std::size_t modes, double dt, std::span<const double> spaceWeights) {
    if (modes == 0 || path.size() % modes != 0 || path.size() / modes < 2) {
        throw std::invalid_argument("path needs at least two grid points");
    }
    const std::size_t points = path.size() / modes;
    CompensatedSum acc;
    for (std::size_t i = 0; i < points; ++i) {
        double e = 0.0;
        for (std::size_t k = 0; k < modes; ++k) e += spaceWeights[k] * path[i * modes + k] * path[i * modes + k];
        acc.add((i == 0 || i + 1 == points) ? 0.5 * e : e);
    }
    return dt * acc.value();
}

std::vector<double> coarsen_path(std::span<const double> path, std::size_t modes) {
    const std::size_t points = path.size() / modes;
    if ((points - 1) % 2 != 0) throw std::invalid_argument("coarsening needs an even number of steps");
    const std::size_t coarse_points = (points - 1) / 2 + 1;
    std::vector<double> out(coarse_points * modes);
    for (std::size_t i = 0; i < coarse_points; ++i) {
        std::copy_n(path.begin() + static_cast<std::ptrdiff_t>(2 * i * modes), modes,
                    out.begin() + static_cast<std::ptrdiff_t>(i * modes));
    }
    return out;
}

SeminormEstimate summarize(std::span<const double> samples) {
    SeminormEstimate e;
    e.nPaths = samples.size();
    if (samples.empty()) return e;
    e.mean = compensated_sum(samples) / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        CompensatedSum sq;
        for (double v : samples) sq.add((v - e.mean) * (v - e.mean));
        const double var = sq.value() / static_cast<double>(samples.size() - 1);
        e.stdError = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return e;
}

SeminormEstimate mc_seminorm(const PathEnsemble& ensemble, double alpha, const SpectralOperator& op, double theta,
                             KernelScheme scheme, unsigned threads) {
    if (ensemble.nPaths == 0) throw std::invalid_argument("empty ensemble");
    if (ensemble.modes != op.size()) throw std::invalid_argument("ensemble and operator disagree on modes");
    const KernelWeights w(alpha, ensemble.grid.dt(), ensemble.grid.steps(), scheme);
    const auto sw = space_weights(op, theta);
    std::vector<double> per_path(ensemble.nPaths);
    parallel_for(ensemble.nPaths, threads,
                 [&](std::size_t p) { per_path[p] = discrete_seminorm(ensemble.path(p), ensemble.modes, w, sw); });
    SeminormEstimate e = summarize(per_path);
    e.alpha = alpha;
    e.theta = theta;
    e.kernelScheme = scheme;
    return e;
}

SeminormEstimate mc_l2(const PathEnsemble& ensemble, const SpectralOperator& op, double theta, unsigned threads) {
    if (ensemble.nPaths == 0) throw std::invalid_argument("empty ensemble");
    if (ensemble.modes != op.size()) throw std::invalid_argument("ensemble and operator disagree on modes");
    const auto sw = space_weights(op, theta);
    std::vector<double> per_path(ensemble.nPaths);
    parallel_for(ensemble.nPaths, threads, [&](std::size_t p) {
        per_path[p] = discrete_l2(ensemble.path(p), ensemble.modes, ensemble.grid.dt(), sw);
    });
    SeminormEstimate e = summarize(per_path);
    e.alpha = 0.0;
    e.theta = theta;
    return e;
}

RefinedEstimate refine(std::span<const double> fine, std::span<const double> coarse, double order,
                       const SeminormEstimate& tag) {
    if (fine.size() != coarse.size()) throw std::invalid_argument("paired estimates need equal path counts");
    RefinedEstimate r;
    r.order = order;
    const double denom = std::pow(2.0, order) - 1.0;
    std::vector<double> bias(fine.size());
    std::vector<double> extrapolated(fine.size());
    for (std::size_t p = 0; p < fine.size(); ++p) {
        bias[p] = (coarse[p] - fine[p]) / denom;
        extrapolated[p] = fine[p] - bias[p];
    }
    auto tagged = [&](SeminormEstimate e) {
        e.alpha = tag.alpha;
        e.theta = tag.theta;
        e.kernelScheme = tag.kernelScheme;
        return e;
    };
    r.fine = tagged(summarize(fine));
    r.coarse = tagged(summarize(coarse));
    const SeminormEstimate b = summarize(bias);
    r.bias = b.mean;
    r.biasStdError = b.stdError;
    r.extrapolated = tagged(summarize(extrapolated));
    return r;
}

namespace {

struct FunctionalKit {
    KernelWeights fineWeights;
    KernelWeights coarseWeights;
    std::vector<double> sw;
    std::size_t modes;
    double dt;
};

FunctionalKit make_kit(const TimeGrid& grid, double alpha, const SpectralOperator& op, double theta,
                       KernelScheme scheme) {
    if (grid.steps() % 2 != 0) throw std::invalid_argument("paired estimates need an even number of steps");
    return FunctionalKit{KernelWeights(alpha, grid.dt(), grid.steps(), scheme),
                         KernelWeights(alpha, 2.0 * grid.dt(), grid.steps() / 2, scheme), space_weights(op, theta),
                         op.size(), grid.dt()};
}

void evaluate(const FunctionalKit& kit, std::span<const double> path, PathFunctionals& out, std::size_t p) {
    const auto coarse = coarsen_path(path, kit.modes);
    out.seminormFine[p] = discrete_seminorm(path, kit.modes, kit.fineWeights, kit.sw);
    out.seminormCoarse[p] = discrete_seminorm(coarse, kit.modes, kit.coarseWeights, kit.sw);
    out.l2Fine[p] = discrete_l2(path, kit.modes, kit.dt, kit.sw);
    out.l2Coarse[p] = discrete_l2(coarse, kit.modes, 2.0 * kit.dt, kit.sw);
}

PathFunctionals sized(std::size_t n) {
    PathFunctionals f;
    f.seminormFine.resize(n);
    f.seminormCoarse.resize(n);
    f.l2Fine.resize(n);
    f.l2Coarse.resize(n);
    return f;
}

}  // namespace

PathFunctionals stream_functionals(const PathSampler& sampler, std::size_t nPaths, double alpha,
                                   const SpectralOperator& op, double theta, KernelScheme scheme, unsigned threads) {
    if (sampler.modes() != op.size()) throw std::invalid_argument("sampler and operator disagree on modes");
    const FunctionalKit kit = make_kit(sampler.grid(), alpha, op, theta, scheme);
    PathFunctionals out = sized(nPaths);
    const std::size_t stride = sampler.grid().points() * sampler.modes();
    parallel_for(nPaths, threads, [&](std::size_t p) {
        thread_local std::vector<double> buffer;
        buffer.resize(stride);
        sampler.sample(p, buffer);
        evaluate(kit, buffer, out, p);
    });
    return out;
}

PathFunctionals ensemble_functionals(const PathEnsemble& ensemble, double alpha, const SpectralOperator& op,
                                     double theta, KernelScheme scheme, unsigned threads) {
    if (ensemble.modes != op.size()) throw std::invalid_argument("ensemble and operator disagree on modes");
    const FunctionalKit kit = make_kit(ensemble.grid, alpha, op, theta, scheme);
    PathFunctionals out = sized(ensemble.nPaths);
    parallel_for(ensemble.nPaths, threads, [&](std::size_t p) { evaluate(kit, ensemble.path(p), out, p); });
    return out;
}

double seminorm_bias_order(double alpha) {
    require_alpha(alpha);
    return 1.0;
}

double expected_discrete_seminorm(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid,
                                  double alpha, double theta, KernelScheme scheme) {
    require_same_size(op, x);
    const std::size_t n = grid.steps();
    const KernelWeights w(alpha, grid.dt(), n, scheme);
    CompensatedSum acc;
    for (std::size_t d = 1; d < n; ++d) {
        CompensatedSum lag;
        for (std::size_t i = 0; i + d < n; ++i) lag.add(increment_second_moment(op, x, grid.time(i), grid.time(i + d), theta));
        acc.add(w.weight(d) * lag.value());
    }
    return 2.0 * acc.value();
}

double expected_discrete_l2(const SpectralOperator& op, const SpectralVector& x, const TimeGrid& grid, double theta) {
    require_same_size(op, x);
    const auto ev = op.eigenvalues();
    CompensatedSum acc;
    for (std::size_t i = 0; i < grid.points(); ++i) {
        const double t = grid.time(i);
        double e = 0.0;
        for (std::size_t k = 0; k < ev.size(); ++k) {
            e += std::pow(ev[k], 2.0 * theta) * x[k] * x[k] * (-std::expm1(-2.0 * ev[k] * t)) / (2.0 * ev[k]);
        }
        acc.add((i == 0 || i + 1 == grid.points()) ? 0.5 * e : e);
    }
    return grid.dt() * acc.value();
}

GateResult oracle_gate(const SeminormEstimate& estimate, double oracleValue, double kSigma, double bias) {
    if (!(kSigma > 0.0)) throw std::invalid_argument("kSigma must be positive");
    GateResult g;
    g.deviation = std::abs(estimate.mean - oracleValue);
    g.allowance = kSigma * estimate.stdError + std::abs(bias) * std::abs(oracleValue);
    g.pass = g.deviation <= g.allowance;
    return g;
}

}  // namespace sobolab
