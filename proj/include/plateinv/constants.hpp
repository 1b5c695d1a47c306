#pragma once

#include "plateinv/special_functions.hpp"

namespace plateinv {

/// Every sign/prefactor that couples the low-frequency expansion of (u, Delta u)
/// to the moment extraction lives here, each with a dedicated unit test. The
/// composition each value abbreviates is spelled out on the right.
namespace expansion_constants {

inline const double inv2pi = 1.0 / (2.0 * kPi);
inline const Complex ip1_8pi = Complex(1.0, 1.0) / (8.0 * kPi);   // (i+1)/(8 pi)
inline const Complex im1_8pi = Complex(1.0, -1.0) / (8.0 * kPi);  // (1-i)/(8 pi)

// u-expansion coefficients M_m
inline const Complex M_minus1 = inv2pi * ip1_8pi;                 // (1/2pi)(i+1)/(8pi), times mass(rho g)
inline const double M0 = inv2pi;                                  // times int rho g G_0
inline const Complex M1_f = -kImag * inv2pi * ip1_8pi;            // -(i/2pi)(i+1)/(8pi), times mass(rho f)
inline const Complex M1_g = inv2pi * im1_8pi;                     // (1/2pi)(1-i)/(8pi), times int rho g r^2/3!
inline const Complex M2_contrast = ip1_8pi;                       // times M_{-1} int (rho-1)
inline const Complex M2_f = -kImag * inv2pi;                      // times int rho f G_0
inline const double M3_contrast_G0 = 1.0;                         // times int (rho-1) M_{-1} G_0
inline const Complex M3_contrast_M0 = ip1_8pi;                    // times int (rho-1) M_0(y)
inline const Complex M3_f = -kImag * inv2pi * im1_8pi;            // times int rho f r^2/3!
inline const Complex M3_g = inv2pi * ip1_8pi;                     // times int rho g r^4/5!

// Delta u-expansion coefficients N_m
inline const double N0 = -inv2pi;                                 // times int rho g g_0
inline const Complex N1 = inv2pi * im1_8pi;                       // times mass(rho g)
inline const Complex N2 = kImag * inv2pi;                         // times int rho f g_0
inline const double N3_contrast = -1.0;                           // times M_{-1} int (rho-1) g_0
inline const Complex N3_f = -kImag * inv2pi * im1_8pi;            // times mass(rho f)
inline const Complex N3_g = inv2pi * ip1_8pi;                     // times int rho g r^2/3!

/// Moment extraction factor for the rho*g target: the kappa^0 coefficient of
/// Delta u equals N0-prefactor times the g_0 potential, whose multipole term
/// carries 1/((2m+1) R^{m+1}); inverting gives -2 pi (2m+1) R^{m+1}.
inline Complex moment_factor_rho_g(int m, double R) {
    return Complex(-2.0 * kPi * (2.0 * m + 1.0) * std::pow(R, m + 1), 0.0);
}

/// Same for the rho*f target, read from the kappa^2 coefficient (i/2pi prefactor).
inline Complex moment_factor_rho_f(int m, double R) {
    return Complex(0.0, -2.0 * kPi * (2.0 * m + 1.0) * std::pow(R, m + 1));
}

/// Rescale of the fitted kappa^3 coefficient of Delta u to the density-coupling
/// functional: N3 = (i+1)/(16 pi^2) * (Q - mass_f - mass_g * g_0-potential of
/// (rho-1)), so the functional is -16 pi^2/(1+i) * N3 = -8 pi^2 (1-i) N3.
inline const Complex eq3_payload = -8.0 * kPi * kPi * Complex(1.0, -1.0);

} // namespace expansion_constants

} // namespace plateinv
