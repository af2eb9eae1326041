#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace shen::rng {

// Philox 4x32-10 counter-based generator. A block is addressed by
// (seed, path, step, idx); identical addresses give identical output on
// every platform and under any thread scheduling.
namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline void round_once(std::uint32_t x[4], const std::uint32_t k[2]) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(0xD2511F53u, x[0], lo0, hi0);
    mulhilo(0xCD9E8D57u, x[2], lo1, hi1);
    const std::uint32_t y0 = hi1 ^ x[1] ^ k[0];
    const std::uint32_t y1 = lo1;
    const std::uint32_t y2 = hi0 ^ x[3] ^ k[1];
    const std::uint32_t y3 = lo0;
    x[0] = y0; x[1] = y1; x[2] = y2; x[3] = y3;
}

}  // namespace detail

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    std::uint32_t x[4] = {ctr[0], ctr[1], ctr[2], ctr[3]};
    std::uint32_t k[2] = {key[0], key[1]};
    for (int r = 0; r < 10; ++r) {
        detail::round_once(x, k);
        if (r < 9) {
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
    }
    return {x[0], x[1], x[2], x[3]};
}

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint32_t path,
                                          std::uint32_t step, std::uint32_t idx) {
    return philox4x32({idx, step, path, 0x5348454Eu},
                      {static_cast<std::uint32_t>(seed),
                       static_cast<std::uint32_t>(seed >> 32)});
}

// Map 64 random bits to (0,1), excluding both endpoints. 52-bit midpoints
// (2v+1) 2^-53 are exactly representable, so neither endpoint is reachable
// even after rounding.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(x >> 12) * 0x1.0p-52 + 0x1.0p-53;
}

// Rational approximation to the standard normal quantile (Acklam's
// coefficients, relative error below 1.2e-9 over (0,1)).
inline double normal_quantile(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Two standard normals per block.
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint32_t path,
                                         std::uint32_t step, std::uint32_t idx) {
    const auto w = block(seed, path, step, idx);
    return {normal_quantile(to_unit(w[0], w[1])), normal_quantile(to_unit(w[2], w[3]))};
}

}  // namespace shen::rng
