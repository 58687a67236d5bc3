#include "sobolab/dirichlet_frontend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sobolab/reduction.hpp"

namespace sobolab::dirichlet {

using std::numbers::pi;

void IntervalDomain::validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("interval length must be positive");
}

void GridFunction::validate() const {
    if (intervals() < 8) throw std::invalid_argument("grid function needs at least 9 samples");
    for (double v : samples) {
        if (!std::isfinite(v)) throw std::invalid_argument("grid function samples must be finite");
    }
}

Profile profile_from_string(const std::string& name) {
    if (name == "one") return Profile::One;
    if (name == "sine") return Profile::Sine;
    if (name == "hat") return Profile::Hat;
    throw std::invalid_argument("unknown profile '" + name + "' (expected one, sine or hat)");
}

const char* to_string(Profile p) noexcept {
    switch (p) {
        case Profile::One: return "one";
        case Profile::Sine: return "sine";
        case Profile::Hat: return "hat";
    }
    return "unknown";
}

const char* to_string(Verdict v) noexcept { return v == Verdict::FiniteStable ? "finite-stable" : "diverging"; }

SpectralOperator dirichlet_operator(const IntervalDomain& domain, std::size_t nModes) {
    domain.validate();
    if (nModes < 1) throw std::invalid_argument("need at least one mode");
    std::vector<double> ev(nModes);
    for (std::size_t k = 0; k < nModes; ++k) {
        const double freq = static_cast<double>(k + 1) * pi / domain.length;
        ev[k] = freq * freq;
    }
    return SpectralOperator(std::move(ev));
}

SpectralVector sine_coefficients(const GridFunction& h, const IntervalDomain& domain, std::size_t nModes) {
    domain.validate();
    h.validate();
    const std::size_t m = h.intervals();
    if (m % 2 != 0) throw std::invalid_argument("Simpson quadrature needs an even number of intervals");
    if (nModes > m / 2) {
        throw std::invalid_argument("resolution guard: " + std::to_string(nModes) + " modes need at least " +
                                    std::to_string(2 * nModes) + " intervals");
    }
    const double L = domain.length;
    const double step = L / static_cast<double>(m);
    const double norm = std::sqrt(2.0 / L);
    std::vector<double> out(nModes);
    for (std::size_t k = 1; k <= nModes; ++k) {
        CompensatedSum acc;
        for (std::size_t i = 0; i <= m; ++i) {
            const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            // sin(k pi i / m) with the argument reduced modulo 2m for accuracy.
            const std::size_t phase = (k * i) % (2 * m);
            acc.add(w * h.samples[i] * std::sin(pi * static_cast<double>(phase) / static_cast<double>(m)));
        }
        out[k - 1] = norm * step / 3.0 * acc.value();
    }
    return SpectralVector(std::move(out));
}

SpectralVector profile_coefficients(Profile p, const IntervalDomain& domain, std::size_t nModes) {
    domain.validate();
    const double L = domain.length;
    std::vector<double> out(nModes, 0.0);
    for (std::size_t k = 1; k <= nModes; ++k) {
        const double kk = static_cast<double>(k);
        switch (p) {
            case Profile::One:
                out[k - 1] = (k % 2 == 1) ? 2.0 * std::sqrt(2.0 * L) / (kk * pi) : 0.0;
                break;
            case Profile::Sine:
                out[k - 1] = (k == 1) ? std::sqrt(L / 2.0) : 0.0;
                break;
            case Profile::Hat: {
                // sin(k pi / 2) is 0 for even k and alternates in sign for odd k.
                const double s = (k % 2 == 0) ? 0.0 : ((k % 4 == 1) ? 1.0 : -1.0);
                out[k - 1] = std::sqrt(L / 2.0) * 8.0 * s / (kk * kk * pi * pi);
                break;
            }
        }
    }
    return SpectralVector(std::move(out));
}

GridFunction sample_profile(Profile p, const IntervalDomain& domain, std::size_t intervals) {
    domain.validate();
    GridFunction g;
    g.samples.resize(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double r = static_cast<double>(i) / static_cast<double>(intervals);
        switch (p) {
            case Profile::One: g.samples[i] = 1.0; break;
            case Profile::Sine: g.samples[i] = std::sin(pi * r); break;
            case Profile::Hat: g.samples[i] = 1.0 - std::abs(2.0 * r - 1.0); break;
        }
    }
    return g;
}

GridFunction read_profile_csv(const std::filesystem::path& file, const IntervalDomain& domain) {
    domain.validate();
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open profile " + file.string());
    std::vector<double> pos;
    GridFunction g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double s = 0.0;
        double v = 0.0;
        if (!(ss >> s >> v)) {
            if (lineno == 1) continue;
            throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        pos.push_back(s);
        g.samples.push_back(v);
    }
    g.validate();
    const std::size_t m = g.intervals();
    const double step = domain.length / static_cast<double>(m);
    for (std::size_t i = 0; i <= m; ++i) {
        if (std::abs(pos[i] - step * static_cast<double>(i)) > 1e-9 * domain.length) {
            throw std::runtime_error(file.string() + ": positions must be uniform on [0, L]");
        }
    }
    return g;
}

Verdict classify_sweep(const TruncationSweep& sweep, double tol) {
    const bool settled = sweep.topRelativeChange < tol;
    const bool growing = sweep.incrementSlope.has_value() && *sweep.incrementSlope >= 0.0;
    return (settled && !growing) ? Verdict::FiniteStable : Verdict::Diverging;
}

std::vector<ThresholdVerdict> threshold_scan(const SpectralVector& coefficients, const IntervalDomain& domain,
                                             const std::vector<double>& alphas, double horizon,
                                             const std::vector<std::size_t>& truncations, double tol,
                                             double quadratureTol, unsigned threads) {
    if (truncations.empty()) throw std::invalid_argument("threshold scan needs truncations");
    const std::size_t modes = truncations.back();
    if (coefficients.size() < modes) throw std::invalid_argument("not enough coefficients for the largest truncation");
    const SpectralOperator op = dirichlet_operator(domain, modes);
    const SpectralVector x = coefficients.truncated(modes);
    std::vector<ThresholdVerdict> out;
    for (double alpha : alphas) {
        if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("threshold scan alphas must lie in (0, 1/2)");
        const RegularityQuery q{alpha, horizon, 0.5};
        const auto terms = seminorm_mode_contributions(op, x, q, quadratureTol, threads);
        ThresholdVerdict v;
        v.alpha = alpha;
        v.sweep = truncation_sweep(terms, truncations);
        v.verdict = classify_sweep(v.sweep, tol);
        if (v.verdict == Verdict::Diverging) v.slope = v.sweep.incrementSlope;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace sobolab::dirichlet
