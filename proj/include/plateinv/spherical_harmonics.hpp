#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "plateinv/grid.hpp"
#include "plateinv/special_functions.hpp"

namespace plateinv {

/// Degree/order pair for Y_m^n, with -m <= n <= m.
struct SHIndex {
    int m = 0;
    int n = 0;
    SHIndex() = default;
    SHIndex(int degree, int order) : m(degree), n(order) {
        if (m < 0 || n < -m || n > m) throw input_error("SHIndex: order out of range");
    }
};

/// Number of harmonics with degree <= m_max.
inline int sh_count(int m_max) { return (m_max + 1) * (m_max + 1); }

/// Flat position of (m, n) in the degree-major layout.
inline int sh_flat(int m, int n) { return m * m + m + n; }

namespace detail {

/// Fully normalized associated Legendre values Pbar_m^n(cos_theta) for all
/// 0 <= n <= m <= m_max, Condon-Shortley phase included, so that
/// Y_m^n = Pbar_m^n(cos_theta) e^{i n phi}.
inline void normalized_legendre(int m_max, double ct, double st, std::vector<double>& p) {
    p.assign(static_cast<size_t>((m_max + 1) * (m_max + 2) / 2), 0.0);
    auto at = [m_max](int m, int n) { return m * (m + 1) / 2 + n; };
    p[0] = std::sqrt(1.0 / (4.0 * kPi));
    for (int n = 1; n <= m_max; ++n)
        p[static_cast<size_t>(at(n, n))] =
            -std::sqrt((2.0 * n + 1.0) / (2.0 * n)) * st * p[static_cast<size_t>(at(n - 1, n - 1))];
    for (int n = 0; n < m_max; ++n)
        p[static_cast<size_t>(at(n + 1, n))] =
            std::sqrt(2.0 * n + 3.0) * ct * p[static_cast<size_t>(at(n, n))];
    for (int n = 0; n <= m_max; ++n) {
        for (int m = n + 2; m <= m_max; ++m) {
            const double a = std::sqrt((4.0 * m * m - 1.0) / (static_cast<double>(m) * m - static_cast<double>(n) * n));
            const double b = std::sqrt((static_cast<double>(m - 1) * (m - 1) - static_cast<double>(n) * n) /
                                       (4.0 * static_cast<double>(m - 1) * (m - 1) - 1.0));
            p[static_cast<size_t>(at(m, n))] =
                a * (ct * p[static_cast<size_t>(at(m - 1, n))] - b * p[static_cast<size_t>(at(m - 2, n))]);
        }
    }
}

} // namespace detail

/// All orthonormal complex spherical harmonics Y_m^n(dir) for m <= m_max, in the
/// flat layout of sh_flat. Convention: conj(Y_m^n) = (-1)^n Y_m^{-n} and
/// integral over S^2 of Y_m^n conj(Y_m'^n') equals the Kronecker delta.
inline std::vector<Complex> sh_basis(const Vec3& dir, int m_max) {
    if (std::abs(dir.norm() - 1.0) > 1e-12)
        throw input_error("sh_basis: direction must be a unit vector");
    const double ct = dir.z();
    const double st = std::sqrt(std::max(0.0, dir.x() * dir.x() + dir.y() * dir.y()));
    Complex eip{1.0, 0.0};
    if (st > 0.0) eip = Complex(dir.x() / st, dir.y() / st);

    std::vector<double> p;
    detail::normalized_legendre(m_max, ct, st, p);
    auto at = [](int m, int n) { return m * (m + 1) / 2 + n; };

    std::vector<Complex> phases(static_cast<size_t>(m_max + 1));
    phases[0] = Complex{1.0, 0.0};
    for (int n = 1; n <= m_max; ++n) phases[static_cast<size_t>(n)] = phases[static_cast<size_t>(n - 1)] * eip;

    std::vector<Complex> out(static_cast<size_t>(sh_count(m_max)));
    for (int m = 0; m <= m_max; ++m) {
        for (int n = 0; n <= m; ++n) {
            const Complex y = p[static_cast<size_t>(at(m, n))] * phases[static_cast<size_t>(n)];
            out[static_cast<size_t>(sh_flat(m, n))] = y;
            if (n > 0) {
                const double sign = (n % 2 == 0) ? 1.0 : -1.0;
                out[static_cast<size_t>(sh_flat(m, -n))] = sign * std::conj(y);
            }
        }
    }
    return out;
}

/// Single orthonormal complex spherical harmonic Y_m^n(dir).
inline Complex eval_sh(const SHIndex& idx, const Vec3& dir) {
    const auto basis = sh_basis(dir, idx.m);
    return basis[static_cast<size_t>(sh_flat(idx.m, idx.n))];
}

} // namespace plateinv
