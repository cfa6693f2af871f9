#pragma once

#include <cmath>

namespace mfsc::detail {

// Probabilists' Hermite polynomial He_n(y), so that
// d^n/dy^n exp(-y^2/2) = (-1)^n He_n(y) exp(-y^2/2).
inline double hermite_he(int n, double y) {
    if (n == 0) return 1.0;
    double h0 = 1.0, h1 = y;
    for (int k = 1; k < n; ++k) {
        const double h2 = y * h1 - k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

// n-th derivative of exp(-(t-c)^2/(2 s^2)) at t.
inline double gaussian_factor_derivative(int n, double t, double c, double s) {
    const double y = (t - c) / s;
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(s, -n) * hermite_he(n, y) * std::exp(-0.5 * y * y);
}

// Cramer's bound: |He_n(y)| exp(-y^2/4) <= kCramer * sqrt(n!).
inline constexpr double kCramer = 1.086435;

inline double sqrt_factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return std::sqrt(f);
}

}  // namespace mfsc::detail
