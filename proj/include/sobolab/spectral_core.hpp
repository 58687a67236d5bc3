#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sobolab {

/**
 * Diagonal model of a positive, invertible, self-adjoint operator A.
 *
 * Eigenvalues are held in ascending order; the spectral gap is the smallest
 * eigenvalue and gives the semigroup bound |e^{-tA}| <= e^{-gap*t}.
 * Instances are immutable once built.
 */
class SpectralOperator {
public:
    /// Sorts `eigenvalues`; throws std::invalid_argument on empty, non-finite
    /// or nonpositive input.
    explicit SpectralOperator(std::vector<double> eigenvalues);

    [[nodiscard]] std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    [[nodiscard]] double eigenvalue(std::size_t k) const { return eigenvalues_.at(k); }
    [[nodiscard]] std::size_t size() const noexcept { return eigenvalues_.size(); }
    [[nodiscard]] double gap() const noexcept { return eigenvalues_.front(); }

    /// Operator restricted to its first `modes` eigenvalues.
    [[nodiscard]] SpectralOperator truncated(std::size_t modes) const;

private:
    std::vector<double> eigenvalues_;
};

/// Coefficients of a vector in the eigenbasis of a SpectralOperator.
class SpectralVector {
public:
    SpectralVector() = default;
    /// Throws std::invalid_argument if any coefficient is non-finite.
    explicit SpectralVector(std::vector<double> coefficients);

    static SpectralVector zeros(std::size_t n) { return SpectralVector(std::vector<double>(n, 0.0)); }

    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] double operator[](std::size_t k) const { return coefficients_[k]; }
    [[nodiscard]] std::size_t size() const noexcept { return coefficients_.size(); }
    [[nodiscard]] bool is_zero() const noexcept;

    [[nodiscard]] SpectralVector scaled(double factor) const;
    [[nodiscard]] SpectralVector truncated(std::size_t modes) const;

private:
    std::vector<double> coefficients_;
};

/// x_k = amplitude * k^{-decay},  lambda_k = scale * k^{growth},  k = 1, 2, ...
struct PowerFamily {
    double amplitude = 1.0;
    double decay = 0.0;
    double scale = 1.0;
    double growth = 2.0;

    /// Throws std::invalid_argument unless amplitude, scale, growth > 0 and decay >= 0.
    void validate() const;
    [[nodiscard]] SpectralOperator make_operator(std::size_t modes) const;
    [[nodiscard]] SpectralVector make_vector(std::size_t modes) const;
};

struct Membership {
    bool member = false;
    /// Exponent e in sum_k lambda_k^{2 alpha} x_k^2 ~ sum_k k^{e}.
    double termExponent = 0.0;
    /// Partial-sum growth exponent e + 1; present only for nonmembers.
    std::optional<double> growthExponent;
};

SpectralOperator make_operator(std::vector<double> eigenvalues);

/// Throws std::invalid_argument when sizes differ.
void require_same_size(const SpectralOperator& op, const SpectralVector& x);

/// |A^alpha x| = (sum_k lambda_k^{2 alpha} x_k^2)^{1/2}.
double fractional_norm(const SpectralOperator& op, const SpectralVector& x, double alpha);

/// Coefficientwise x_k e^{-lambda_k t}.
SpectralVector semigroup_apply(const SpectralOperator& op, double t, const SpectralVector& x);

/// Decides x in D(A^alpha) for a power family by the p-series test.
/// alpha must lie in [0, 1/2).
Membership classify_power_family(const PowerFamily& family, double alpha);

}  // namespace sobolab
