#pragma once

#include <complex>
#include <optional>

#include "plateinv/grid.hpp"
#include "plateinv/spherical_harmonics.hpp"

namespace plateinv {

/// Midpoint-rule volume integral over the (optionally masked) grid, summed in
/// the fixed voxel order.
template <typename T>
T integrate_volume(const ScalarField<T>& field, const Mask* mask = nullptr) {
    if (mask && static_cast<int>(mask->size()) != field.size())
        throw input_error("integrate_volume: mask size mismatch");
    const double vol = field.grid->voxel_volume();
    T acc{};
    for (int i = 0; i < field.size(); ++i) {
        if (mask && !(*mask)[static_cast<size_t>(i)]) continue;
        acc += field[i];
    }
    return acc * vol;
}

/// Harmonic moment of a voxel field by direct quadrature:
/// integral of q(y) |y|^m conj(Y_m^n)(y/|y|) dy. This is the ground truth the
/// boundary-data extraction is validated against.
inline Complex harmonic_moment_oracle(const ScalarFieldC& q, const SHIndex& idx) {
    const double vol = q.grid->voxel_volume();
    Complex acc{0.0, 0.0};
    for (int i = 0; i < q.size(); ++i) {
        const Complex qv = q[i];
        if (qv == Complex{0.0, 0.0}) continue;
        const Vec3 y = q.grid->center(i);
        const double r = y.norm();
        if (r < 1e-300) {
            // solid harmonic r^m Y vanishes at the origin except for m = 0
            if (idx.m == 0) acc += qv * std::sqrt(1.0 / (4.0 * kPi));
            continue;
        }
        const Complex ybar = std::conj(eval_sh(idx, y / r));
        acc += qv * std::pow(r, idx.m) * ybar;
    }
    return acc * vol;
}

inline Complex harmonic_moment_oracle(const ScalarFieldR& q, const SHIndex& idx) {
    ScalarFieldC qc(q.grid);
    for (int i = 0; i < q.size(); ++i) qc[i] = Complex(q[i], 0.0);
    return harmonic_moment_oracle(qc, idx);
}

/// Monomial moments of degree <= 2: (S0, S1, S2) = (int q, int y q, int |y|^2 q).
struct MonomialMoments {
    double s0 = 0.0;
    Vec3 s1 = Vec3::Zero();
    double s2 = 0.0;
};

inline MonomialMoments monomial_moments(const ScalarFieldR& q) {
    MonomialMoments mm;
    const double vol = q.grid->voxel_volume();
    for (int i = 0; i < q.size(); ++i) {
        const double v = q[i];
        if (v == 0.0) continue;
        const Vec3 y = q.grid->center(i);
        mm.s0 += v;
        mm.s1 += v * y;
        mm.s2 += v * y.squaredNorm();
    }
    mm.s0 *= vol;
    mm.s1 *= vol;
    mm.s2 *= vol;
    return mm;
}

/// int q(y) |x-y|^2 dy assembled from the monomial moments; identical to direct
/// quadrature by the expansion |x-y|^2 = |x|^2 - 2 x.y + |y|^2.
inline double shifted_second_moment(const MonomialMoments& mm, const Vec3& x) {
    return x.squaredNorm() * mm.s0 - 2.0 * x.dot(mm.s1) + mm.s2;
}

} // namespace plateinv
