#include "sobolab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>

#include "sobolab/reduction.hpp"

namespace sobolab::quadrature {

namespace {

GaussLegendreRule build_rule(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

constexpr int kPanelPoints = 16;

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double whole = 0.0;
    double left = 0.0;
    double right = 0.0;
    [[nodiscard]] double refined() const { return left + right; }
    [[nodiscard]] double error() const { return std::abs(whole - refined()); }
};

struct ByError {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.error() != y.error()) return x.error() < y.error();
        return x.a > y.a;
    }
};

class PanelRule {
public:
    explicit PanelRule(const Integrand& f) : f_(f), rule_(gauss_legendre(kPanelPoints)) {}

    double apply(double a, double b) {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double s = 0.0;
        for (std::size_t i = 0; i < rule_.nodes.size(); ++i) s += rule_.weights[i] * f_(mid + half * rule_.nodes[i]);
        evaluations_ += rule_.nodes.size();
        return half * s;
    }

    Panel make(double a, double b, double whole) {
        const double m = 0.5 * (a + b);
        return Panel{a, b, whole, apply(a, m), apply(m, b)};
    }

    [[nodiscard]] std::size_t evaluations() const noexcept { return evaluations_; }

private:
    const Integrand& f_;
    const GaussLegendreRule& rule_;
    std::size_t evaluations_ = 0;
};

// Shift the lower end away from zero by one geometric factor per step until
// the feature scale is resolved well below the first cell.
int graded_levels(double upper, double scale) {
    const double ratio = std::max(1.0, upper * scale);
    return std::clamp(static_cast<int>(std::ceil(std::log2(ratio))) + 12, 12, 1000);
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int points) {
    static std::mutex guard;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard<std::mutex> lock(guard);
    auto it = cache.find(points);
    if (it == cache.end()) it = cache.emplace(points, build_rule(points)).first;
    return it->second;
}

QuadratureResult integrate_adaptive(const Integrand& f, std::span<const double> breaks, const AdaptiveOptions& opt) {
    QuadratureResult out;
    if (breaks.size() < 2) return out;
    PanelRule rule(f);
    std::priority_queue<Panel, std::vector<Panel>, ByError> queue;
    double total = 0.0;
    double errors = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = breaks[i + 1];
        Panel p = rule.make(a, b, rule.apply(a, b));
        total += p.refined();
        errors += p.error();
        queue.push(p);
    }
    while (errors > std::max(opt.relTol * std::abs(total), opt.absTol)) {
        if (queue.size() >= opt.maxPanels) {
            out.converged = false;
            break;
        }
        const Panel worst = queue.top();
        queue.pop();
        const double m = 0.5 * (worst.a + worst.b);
        const Panel lo = rule.make(worst.a, m, worst.left);
        const Panel hi = rule.make(m, worst.b, worst.right);
        total += lo.refined() + hi.refined() - worst.refined();
        errors += lo.error() + hi.error() - worst.error();
        queue.push(lo);
        queue.push(hi);
        if (!std::isfinite(total)) {
            out.converged = false;
            break;
        }
    }

    std::vector<Panel> panels;
    panels.reserve(queue.size());
    while (!queue.empty()) {
        panels.push_back(queue.top());
        queue.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    CompensatedSum value;
    CompensatedSum err;
    for (const Panel& p : panels) {
        value.add(p.refined());
        err.add(p.error());
    }
    out.value = value.value();
    out.errorEstimate = err.value();
    out.panels = panels.size();
    out.evaluations = rule.evaluations();
    if (!std::isfinite(out.value)) out.converged = false;
    return out;
}

QuadratureResult integrate_graded(const WeakSingularProblem& p, const AdaptiveOptions& opt) {
    const double beta = p.beta;
    const double upper = p.upper;
    const int levels = graded_levels(upper, p.scale);
    const double inner = std::ldexp(upper, -levels);

    std::vector<double> breaks;
    breaks.reserve(static_cast<std::size_t>(levels) + 1);
    for (int j = levels; j >= 0; --j) breaks.push_back(std::ldexp(upper, -j));
    const Integrand outer_f = [&](double tau) { return std::pow(tau, -beta) * p.smooth(tau); };

    const double power = 1.0 / (1.0 - beta);
    const double jacobian = power * std::pow(inner, 1.0 - beta);
    const Integrand inner_f = [&](double w) { return jacobian * p.smooth(inner * std::pow(w, power)); };
    const std::vector<double> unit{0.0, 1.0};

    AdaptiveOptions half = opt;
    half.relTol = 0.5 * opt.relTol;
    half.absTol = 0.5 * opt.absTol;
    const QuadratureResult a = integrate_adaptive(inner_f, unit, half);
    const QuadratureResult b = integrate_adaptive(outer_f, breaks, half);

    QuadratureResult out;
    out.value = a.value + b.value;
    out.errorEstimate = a.errorEstimate + b.errorEstimate;
    out.panels = a.panels + b.panels;
    out.evaluations = a.evaluations + b.evaluations;
    out.converged = a.converged && b.converged;
    return out;
}

QuadratureResult integrate_exponential(const WeakSingularProblem& p, const AdaptiveOptions& opt) {
    const double beta = p.beta;
    const double cut = std::min(p.upper, 1.0 / p.scale) * 1e-7;
    const double lo = std::log(cut);
    const double hi = std::log(p.upper);
    const int cells = std::max(4, static_cast<int>(std::ceil((hi - lo) / 0.5)));

    std::vector<double> breaks(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) breaks[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / cells;
    breaks.back() = hi;
    const Integrand f = [&](double u) {
        const double tau = std::exp(u);
        return std::exp(u * (1.0 - beta)) * p.smooth(tau);
    };
    QuadratureResult out = integrate_adaptive(f, breaks, opt);

    const double g_half = p.smooth(0.5 * cut);
    const double g_full = p.smooth(cut);
    const double g0 = 2.0 * g_half - g_full;
    const double g1 = (g_full - g_half) / (0.5 * cut);
    const double tail = g0 * std::pow(cut, 1.0 - beta) / (1.0 - beta) + g1 * std::pow(cut, 2.0 - beta) / (2.0 - beta);
    out.value += tail;
    out.evaluations += 2;
    return out;
}

}  // namespace sobolab::quadrature
