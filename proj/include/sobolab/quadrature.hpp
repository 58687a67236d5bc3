#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobolab::quadrature {

struct QuadratureResult {
    double value = 0.0;
    double errorEstimate = 0.0;
    std::size_t panels = 0;
    std::size_t evaluations = 0;
    bool converged = true;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, QuadratureResult partial)
        : std::runtime_error(what), partial_(partial) {}
    [[nodiscard]] const QuadratureResult& partial() const noexcept { return partial_; }

private:
    QuadratureResult partial_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Rule with `points` nodes, computed once by Newton iteration and cached.
const GaussLegendreRule& gauss_legendre(int points);

using Integrand = std::function<double(double)>;

struct AdaptiveOptions {
    double relTol = 1e-10;
    double absTol = 0.0;
    std::size_t maxPanels = 20000;
};

/// Globally adaptive composite Gauss-Legendre over the mesh `breaks`
/// (strictly increasing). Each panel is compared with its bisection; the
/// panel with the largest discrepancy is split until the summed discrepancy
/// meets max(relTol*|I|, absTol). Never throws; check `converged`.
QuadratureResult integrate_adaptive(const Integrand& f, std::span<const double> breaks, const AdaptiveOptions& opt);

/// Integral over [0, upper] of tau^{-beta} g(tau) with 0 <= beta < 1 and g
/// smooth. `scale` is the inverse length of the finest feature of g (for
/// example an eigenvalue), used to size the mesh.
struct WeakSingularProblem {
    Integrand smooth;
    double beta = 0.0;
    double upper = 1.0;
    double scale = 1.0;
};

/// Route 1: geometric mesh graded toward tau = 0, with the innermost cell
/// [0, tau_0] mapped by tau = tau_0 w^{1/(1-beta)} so the singular weight
/// becomes constant.
QuadratureResult integrate_graded(const WeakSingularProblem& p, const AdaptiveOptions& opt);

/// Route 2: tau = e^u on (-inf, log upper], truncated where scale*tau is
/// tiny; the omitted piece is added from a two-term expansion of g at 0.
QuadratureResult integrate_exponential(const WeakSingularProblem& p, const AdaptiveOptions& opt);

}  // namespace sobolab::quadrature
