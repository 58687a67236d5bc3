#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace sobolab {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the output
/// is a pure function of (counter, key).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Standard normal variates addressed by (seed, path, step). Each Philox
/// block yields two 53-bit uniforms and hence two Box-Muller normals, so
/// draws never depend on generation order.
class GaussianStream {
public:
    explicit constexpr GaussianStream(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    void fill(std::uint64_t path, std::uint64_t step, std::span<double> out) const noexcept {
        const std::size_t n = out.size();
        for (std::size_t block = 0; 2 * block < n; ++block) {
            const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(step),
                                          static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
            const auto r = Philox4x32::apply(ctr, key_);
            // u1 in (0, 1] keeps the logarithm finite.
            const double u1 = (static_cast<double>(combine(r[0], r[1]) >> 11) + 1.0) * 0x1.0p-53;
            const double u2 = static_cast<double>(combine(r[2], r[3]) >> 11) * 0x1.0p-53;
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * std::numbers::pi * u2;
            out[2 * block] = radius * std::cos(angle);
            if (2 * block + 1 < n) out[2 * block + 1] = radius * std::sin(angle);
        }
    }

private:
    static constexpr std::uint64_t combine(std::uint32_t hi, std::uint32_t lo) noexcept {
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

    Philox4x32::Key key_;
};

}  // namespace sobolab
