#pragma once

#include <cmath>

#include "spdelab/errors.hpp"

namespace spdelab {

// Closed-form integrals of products of sin(a pi x), cos(b pi x) with integer
// frequencies over a subinterval [x0, x1] of the unit interval. These feed
// matrix assembly paths that would otherwise need fine oscillatory
// quadrature; having both routes lets tests cross-check each other.

inline constexpr double kPi = 3.141592653589793238462643383279502884;

namespace trigdetail {

// Antiderivative of sin(a pi x) sin(b pi x), a, b >= 0 integers.
inline double anti_sin_sin(int a, int b, double x) {
    if (a == 0 || b == 0) return 0.0;
    if (a == b) {
        const double w = static_cast<double>(a) * kPi;
        return 0.5 * x - std::sin(2.0 * w * x) / (4.0 * w);
    }
    const double dm = static_cast<double>(a - b) * kPi;
    const double dp = static_cast<double>(a + b) * kPi;
    return std::sin(dm * x) / (2.0 * dm) - std::sin(dp * x) / (2.0 * dp);
}

// Antiderivative of cos(a pi x) cos(b pi x).
inline double anti_cos_cos(int a, int b, double x) {
    if (a == 0 && b == 0) return x;
    if (a == 0) return std::sin(static_cast<double>(b) * kPi * x) / (static_cast<double>(b) * kPi);
    if (b == 0) return std::sin(static_cast<double>(a) * kPi * x) / (static_cast<double>(a) * kPi);
    if (a == b) {
        const double w = static_cast<double>(a) * kPi;
        return 0.5 * x + std::sin(2.0 * w * x) / (4.0 * w);
    }
    const double dm = static_cast<double>(a - b) * kPi;
    const double dp = static_cast<double>(a + b) * kPi;
    return std::sin(dm * x) / (2.0 * dm) + std::sin(dp * x) / (2.0 * dp);
}

// Antiderivative of sin(a pi x) cos(b pi x).
inline double anti_sin_cos(int a, int b, double x) {
    if (a == 0) return 0.0;
    if (b == 0) return -std::cos(static_cast<double>(a) * kPi * x) / (static_cast<double>(a) * kPi);
    if (a == b) {
        const double w = static_cast<double>(a) * kPi;
        return -std::cos(2.0 * w * x) / (4.0 * w);
    }
    const double dm = static_cast<double>(a - b) * kPi;
    const double dp = static_cast<double>(a + b) * kPi;
    return -std::cos(dp * x) / (2.0 * dp) - std::cos(dm * x) / (2.0 * dm);
}

inline void check_freqs(int a, int b) {
    if (a < 0 || b < 0) throw ValidationError("trig integral frequencies must be nonnegative");
}

} // namespace trigdetail

inline double integral_sin_sin(int a, int b, double x0, double x1) {
    trigdetail::check_freqs(a, b);
    return trigdetail::anti_sin_sin(a, b, x1) - trigdetail::anti_sin_sin(a, b, x0);
}

inline double integral_cos_cos(int a, int b, double x0, double x1) {
    trigdetail::check_freqs(a, b);
    return trigdetail::anti_cos_cos(a, b, x1) - trigdetail::anti_cos_cos(a, b, x0);
}

inline double integral_sin_cos(int a, int b, double x0, double x1) {
    trigdetail::check_freqs(a, b);
    return trigdetail::anti_sin_cos(a, b, x1) - trigdetail::anti_sin_cos(a, b, x0);
}

// Coefficient of the orthonormal sine mode sqrt(2) sin(m pi x) in cos(a pi x)
// over the full interval. Nonzero only when a + m is odd.
inline double sine_coefficient_of_cos(int a, int m) {
    if (m < 1 || a < 0) throw ValidationError("sine expansion needs m >= 1, a >= 0");
    if (((a + m) & 1) == 0) return 0.0;
    const double md = static_cast<double>(m);
    const double ad = static_cast<double>(a);
    return std::sqrt(2.0) * 2.0 * md / (kPi * (md * md - ad * ad));
}

} // namespace spdelab
