#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "plateinv/errors.hpp"
#include "plateinv/special_functions.hpp"

namespace plateinv {

/// Frequency-domain wavenumber, kappa = sqrt(omega).
struct WaveNumber {
    double kappa;
    explicit WaveNumber(double k) : kappa(k) {
        if (!(k > 0.0)) throw input_error("WaveNumber: kappa must be positive");
    }
    double omega() const { return kappa * kappa; }
};

/// Coefficients c_j of (kappa r)^j in e^{i kappa r} - e^{-kappa r}, j = 1..order.
/// c_j = (i^j - (-1)^j) / j!.
inline std::vector<Complex> osc_series_coeffs(int order) {
    if (order < 1 || order > 5) throw input_error("osc_series_coeffs: order must be in 1..5");
    std::vector<Complex> c(static_cast<size_t>(order));
    for (int j = 1; j <= order; ++j)
        c[static_cast<size_t>(j - 1)] = (ipow(j) - ((j % 2 == 0) ? Complex{1.0, 0.0} : Complex{-1.0, 0.0})) / factorial(j);
    return c;
}

inline constexpr double kSeriesSwitch = 1e-3; // switch G_kappa to its series below this kappa*r

/// Fundamental solution of the biharmonic wave operator,
/// G_kappa(r) = (e^{i kappa r} - e^{-kappa r}) / (8 pi kappa^2 r), continuous at
/// r = 0 with value (i+1)/(8 pi kappa). Small kappa*r uses the order-5 series to
/// avoid subtractive cancellation.
inline Complex biharmonic_green(const WaveNumber& wn, double r) {
    if (r < 0.0) throw input_error("biharmonic_green: negative distance");
    const double k = wn.kappa;
    const double kr = k * r;
    if (kr < kSeriesSwitch) {
        // G = sum_j c_j kappa^{j-2} r^{j-1} / (8 pi), truncated at j = 5
        static const std::array<Complex, 5> c = {Complex{1.0, 1.0}, Complex{-1.0, 0.0},
                                                 Complex{1.0 / 6.0, -1.0 / 6.0}, Complex{0.0, 0.0},
                                                 Complex{1.0 / 120.0, 1.0 / 120.0}};
        Complex acc{0.0, 0.0};
        double kp = 1.0 / k; // kappa^{j-2} with j starting at 1
        double rp = 1.0;     // r^{j-1}
        for (int j = 1; j <= 5; ++j) {
            acc += c[static_cast<size_t>(j - 1)] * kp * rp;
            kp *= k;
            rp *= r;
        }
        return acc / (8.0 * kPi);
    }
    return (std::exp(kImag * kr) - std::exp(-kr)) / (8.0 * kPi * k * k * r);
}

/// Fundamental solution of the static biharmonic operator: G_0(r) = -r / (8 pi).
inline double biharmonic_green_zero(double r) {
    if (r < 0.0) throw input_error("biharmonic_green_zero: negative distance");
    return -r / (8.0 * kPi);
}

/// Fundamental solution of -Laplace: g_0(r) = 1 / (4 pi r), r > 0.
inline double laplace_green(double r) {
    if (!(r > 0.0)) throw input_error("laplace_green: evaluation at the singularity");
    return 1.0 / (4.0 * kPi * r);
}

/// Helmholtz kernel e^{i kappa r} / (4 pi r), r > 0.
inline Complex helmholtz_green(const WaveNumber& wn, double r) {
    if (!(r > 0.0)) throw input_error("helmholtz_green: evaluation at the singularity");
    return std::exp(kImag * (wn.kappa * r)) / (4.0 * kPi * r);
}

/// Modified Helmholtz kernel e^{-kappa r} / (4 pi r), r > 0.
inline double modified_helmholtz_green(const WaveNumber& wn, double r) {
    if (!(r > 0.0)) throw input_error("modified_helmholtz_green: evaluation at the singularity");
    return std::exp(-wn.kappa * r) / (4.0 * kPi * r);
}

/// Laplacian (in x) of G_kappa(|x-y|) away from the source:
/// Delta G = -(Phi_H + Phi_M) / 2, the combination forced by the Helmholtz
/// factorization of the biharmonic operator.
inline Complex laplacian_biharmonic_green(const WaveNumber& wn, double r) {
    if (!(r > 0.0)) throw input_error("laplacian_biharmonic_green: evaluation at the singularity");
    return -0.5 * (helmholtz_green(wn, r) + Complex(modified_helmholtz_green(wn, r), 0.0));
}

} // namespace plateinv
