#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "plateinv/errors.hpp"

namespace plateinv {

using Complex = std::complex<double>;
inline constexpr Complex kImag{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

/// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw input_error("gauss_legendre: need at least one node");
    GaussLegendre rule;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Tricomi initial guess, then Newton.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<size_t>(i)] = x;
        rule.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

/// Spherical Bessel j_m(z) for complex z via the ascending series; accurate and
/// overflow-free for the small-|z| regime this project operates in.
inline Complex sph_bessel_j(int m, Complex z) {
    if (m < 0) throw input_error("sph_bessel_j: negative order");
    if (std::abs(z) > 40.0) throw input_error("sph_bessel_j: series evaluator limited to |z| <= 40");
    // z^m / (2m+1)!!
    Complex lead{1.0, 0.0};
    for (int k = 1; k <= m; ++k) lead *= z / static_cast<double>(2 * k + 1);
    const Complex z2 = -0.5 * z * z;
    Complex term{1.0, 0.0};
    Complex sum{1.0, 0.0};
    for (int k = 1; k < 200; ++k) {
        term *= z2 / (static_cast<double>(k) * static_cast<double>(2 * m + 2 * k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return lead * sum;
}

/// Spherical Hankel function of the first kind, h_m^(1)(z), by the upward
/// recurrence (stable: h grows with order).
inline Complex sph_hankel1(int m, Complex z) {
    if (m < 0) throw input_error("sph_hankel1: negative order");
    if (std::abs(z) == 0.0) throw input_error("sph_hankel1: z = 0");
    const Complex e = std::exp(kImag * z);
    Complex h0 = -kImag * e / z;
    if (m == 0) return h0;
    Complex h1 = -e * (z + kImag) / (z * z);
    for (int k = 1; k < m; ++k) {
        const Complex h2 = static_cast<double>(2 * k + 1) / z * h1 - h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

/// d/dz j_m(z), from the standard recurrence f_m' = f_{m-1} - (m+1)/z f_m.
inline Complex sph_bessel_j_prime(int m, Complex z) {
    if (m == 0) return -sph_bessel_j(1, z);
    return sph_bessel_j(m - 1, z) - static_cast<double>(m + 1) / z * sph_bessel_j(m, z);
}

inline Complex sph_hankel1_prime(int m, Complex z) {
    if (m == 0) return -sph_hankel1(1, z);
    return sph_hankel1(m - 1, z) - static_cast<double>(m + 1) / z * sph_hankel1(m, z);
}

/// i^k as an exact complex value.
inline Complex ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

} // namespace plateinv
