#include "sobolab/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sobolab/reduction.hpp"

namespace sobolab {

SpectralOperator::SpectralOperator(std::vector<double> eigenvalues) : eigenvalues_(std::move(eigenvalues)) {
    if (eigenvalues_.empty()) throw std::invalid_argument("operator needs at least one eigenvalue");
    for (double v : eigenvalues_) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::invalid_argument("eigenvalues must be finite and positive, got " + std::to_string(v));
        }
    }
    std::sort(eigenvalues_.begin(), eigenvalues_.end());
}

SpectralOperator SpectralOperator::truncated(std::size_t modes) const {
    if (modes == 0 || modes > eigenvalues_.size()) throw std::invalid_argument("truncation out of range");
    return SpectralOperator(std::vector<double>(eigenvalues_.begin(), eigenvalues_.begin() + modes));
}

SpectralVector::SpectralVector(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
    for (double v : coefficients_) {
        if (!std::isfinite(v)) throw std::invalid_argument("coefficients must be finite");
    }
}

bool SpectralVector::is_zero() const noexcept {
    return std::all_of(coefficients_.begin(), coefficients_.end(), [](double v) { return v == 0.0; });
}

SpectralVector SpectralVector::scaled(double factor) const {
    std::vector<double> out(coefficients_);
    for (double& v : out) v *= factor;
    return SpectralVector(std::move(out));
}

SpectralVector SpectralVector::truncated(std::size_t modes) const {
    if (modes > coefficients_.size()) throw std::invalid_argument("truncation out of range");
    return SpectralVector(std::vector<double>(coefficients_.begin(), coefficients_.begin() + modes));
}

void PowerFamily::validate() const {
    if (!(amplitude > 0.0) || !(scale > 0.0) || !(growth > 0.0) || !(decay >= 0.0) ||
        !std::isfinite(amplitude) || !std::isfinite(scale) || !std::isfinite(growth) || !std::isfinite(decay)) {
        throw std::invalid_argument("power family needs amplitude, scale, growth > 0 and decay >= 0");
    }
}

SpectralOperator PowerFamily::make_operator(std::size_t modes) const {
    validate();
    std::vector<double> ev(modes);
    for (std::size_t k = 0; k < modes; ++k) ev[k] = scale * std::pow(static_cast<double>(k + 1), growth);
    return SpectralOperator(std::move(ev));
}

SpectralVector PowerFamily::make_vector(std::size_t modes) const {
    validate();
    std::vector<double> c(modes);
    for (std::size_t k = 0; k < modes; ++k) c[k] = amplitude * std::pow(static_cast<double>(k + 1), -decay);
    return SpectralVector(std::move(c));
}

SpectralOperator make_operator(std::vector<double> eigenvalues) { return SpectralOperator(std::move(eigenvalues)); }

void require_same_size(const SpectralOperator& op, const SpectralVector& x) {
    if (op.size() != x.size()) {
        throw std::invalid_argument("operator has " + std::to_string(op.size()) + " modes but vector has " +
                                    std::to_string(x.size()));
    }
}

double fractional_norm(const SpectralOperator& op, const SpectralVector& x, double alpha) {
    require_same_size(op, x);
    if (!(alpha >= 0.0)) throw std::invalid_argument("fractional exponent must be nonnegative");
    CompensatedSum acc;
    const auto ev = op.eigenvalues();
    for (std::size_t k = 0; k < ev.size(); ++k) {
        const double c = x[k];
        acc.add(std::pow(ev[k], 2.0 * alpha) * c * c);
    }
    return std::sqrt(acc.value());
}

SpectralVector semigroup_apply(const SpectralOperator& op, double t, const SpectralVector& x) {
    require_same_size(op, x);
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup time must be nonnegative");
    if (t == 0.0) return x;
    std::vector<double> out(x.size());
    const auto ev = op.eigenvalues();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = x[k] * std::exp(-ev[k] * t);
    return SpectralVector(std::move(out));
}

Membership classify_power_family(const PowerFamily& family, double alpha) {
    family.validate();
    if (!(alpha >= 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in [0, 1/2)");
    Membership m;
    m.termExponent = 2.0 * alpha * family.growth - 2.0 * family.decay;
    m.member = m.termExponent < -1.0;
    if (!m.member) m.growthExponent = m.termExponent + 1.0;
    return m;
}

}  // namespace sobolab
