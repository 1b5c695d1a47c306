#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "plateinv/grid.hpp"

namespace plateinv {

// ---------------------------------------------------------------------------
// mask and profile builders
// ---------------------------------------------------------------------------

inline Mask ball_mask(const GridPtr& grid, const Vec3& center, double radius) {
    Mask m(static_cast<size_t>(grid->count()), 0);
    for (int i = 0; i < grid->count(); ++i)
        if ((grid->center(i) - center).norm() < radius) m[static_cast<size_t>(i)] = 1;
    return m;
}

inline Mask box_mask(const GridPtr& grid, const Vec3& lo, const Vec3& hi) {
    Mask m(static_cast<size_t>(grid->count()), 0);
    for (int i = 0; i < grid->count(); ++i) {
        const Vec3 c = grid->center(i);
        if (c.x() > lo.x() && c.x() < hi.x() && c.y() > lo.y() && c.y() < hi.y() && c.z() > lo.z() &&
            c.z() < hi.z())
            m[static_cast<size_t>(i)] = 1;
    }
    return m;
}

/// Cylinder along the z axis: disc of the given radius in (x1, x2) times the
/// slab [z_lo, z_hi]. This is the natural Omega for translation-invariant runs.
inline Mask cylinder_mask(const GridPtr& grid, double cx, double cy, double radius, double z_lo,
                          double z_hi) {
    Mask m(static_cast<size_t>(grid->count()), 0);
    for (int i = 0; i < grid->count(); ++i) {
        const Vec3 c = grid->center(i);
        const double d2 = (c.x() - cx) * (c.x() - cx) + (c.y() - cy) * (c.y() - cy);
        if (d2 < radius * radius && c.z() > z_lo && c.z() < z_hi) m[static_cast<size_t>(i)] = 1;
    }
    return m;
}

/// Named analytic profile families used for sources and densities. When
/// `invariant` is set the profile ignores x3, which makes replication along the
/// invariance axis exact on the grid.
struct Profile {
    enum class Kind { constant, gaussian, ball, box };
    Kind kind = Kind::constant;
    double amplitude = 1.0;
    Vec3 center = Vec3::Zero();
    double sigma = 0.25;
    double radius = 0.5;
    Vec3 halfwidth = Vec3(0.5, 0.5, 0.5);
    bool invariant = false;
    double support_radius = 0.0; // > 0 truncates a gaussian to a support ball

    double operator()(Vec3 x) const {
        if (invariant) x.z() = 0.0;
        switch (kind) {
            case Kind::constant:
                return amplitude;
            case Kind::gaussian: {
                const Vec3 d = x - effective_center();
                if (support_radius > 0.0 && d.norm() >= support_radius) return 0.0;
                return amplitude * std::exp(-d.squaredNorm() / (2.0 * sigma * sigma));
            }
            case Kind::ball:
                return (x - effective_center()).norm() < radius ? amplitude : 0.0;
            case Kind::box: {
                const Vec3 d = x - effective_center();
                return (std::abs(d.x()) < halfwidth.x() && std::abs(d.y()) < halfwidth.y() &&
                        std::abs(d.z()) < halfwidth.z())
                           ? amplitude
                           : 0.0;
            }
        }
        return 0.0;
    }

    static Profile constant(double a) {
        Profile p;
        p.kind = Kind::constant;
        p.amplitude = a;
        return p;
    }
    static Profile gaussian(double a, Vec3 c, double s, bool invariant = false) {
        Profile p;
        p.kind = Kind::gaussian;
        p.amplitude = a;
        p.center = c;
        p.sigma = s;
        p.invariant = invariant;
        return p;
    }
    static Profile ball(double a, Vec3 c, double r) {
        Profile p;
        p.kind = Kind::ball;
        p.amplitude = a;
        p.center = c;
        p.radius = r;
        return p;
    }

private:
    Vec3 effective_center() const {
        return invariant ? Vec3(center.x(), center.y(), 0.0) : center;
    }
};

/// Source field: profile sampled at voxel centers, zero outside Omega.
inline ScalarFieldR masked_field(const GridPtr& grid, const Mask& omega, const Profile& p) {
    ScalarFieldR f(grid);
    for (int i = 0; i < f.size(); ++i)
        f[i] = omega[static_cast<size_t>(i)] ? p(grid->center(i)) : 0.0;
    return f;
}

/// Density field: profile inside Omega, exactly 1 outside.
inline ScalarFieldR density_field(const GridPtr& grid, const Mask& omega, const Profile& p) {
    ScalarFieldR rho(grid, 1.0);
    for (int i = 0; i < rho.size(); ++i)
        if (omega[static_cast<size_t>(i)]) rho[i] = p(grid->center(i));
    return rho;
}

// ---------------------------------------------------------------------------
// MediumConfig
// ---------------------------------------------------------------------------

/// Full scatterer description: density rho (= 1 outside Omega, nonnegative) and
/// the two internal sources f and g supported in Omega. When an invariance
/// axis is declared (z only), all three fields must be constant along grid
/// columns inside Omega.
struct MediumConfig {
    DomainSpec domain;
    ScalarFieldR rho;
    ScalarFieldR f;
    ScalarFieldR g;
    std::optional<Vec3> invariance_axis;

    MediumConfig(DomainSpec dom, ScalarFieldR rho_in, ScalarFieldR f_in, ScalarFieldR g_in,
                 std::optional<Vec3> axis = std::nullopt)
        : domain(std::move(dom)), rho(std::move(rho_in)), f(std::move(f_in)), g(std::move(g_in)),
          invariance_axis(axis) {
        require_same_grid(rho, f, "MediumConfig");
        require_same_grid(rho, g, "MediumConfig");
        if (!rho.grid->same_layout(*domain.grid))
            throw input_error("MediumConfig: fields and domain use different grids");
        for (int i = 0; i < rho.size(); ++i) {
            const bool inside = domain.omega_mask[static_cast<size_t>(i)] != 0;
            if (rho[i] < 0.0) throw input_error("MediumConfig: density must be nonnegative");
            if (!inside && rho[i] != 1.0)
                throw input_error("MediumConfig: supp(rho - 1) must lie in Omega");
            if (!inside && (f[i] != 0.0 || g[i] != 0.0))
                throw input_error("MediumConfig: sources must be supported in Omega");
        }
        if (invariance_axis) {
            const Vec3 a = *invariance_axis;
            if ((a - Vec3(0, 0, 1)).norm() > 1e-12 && (a + Vec3(0, 0, 1)).norm() > 1e-12)
                throw input_error("MediumConfig: invariance axis must be the z axis "
                                  "(rotate the configuration first)");
            check_column_invariance();
        }
    }

    /// M = sup |rho - 1|.
    double contrast_bound() const {
        double m = 0.0;
        for (int i = 0; i < rho.size(); ++i) m = std::max(m, std::abs(rho[i] - 1.0));
        return m;
    }

    std::vector<int> contrast_voxels() const {
        std::vector<int> out;
        for (int i = 0; i < rho.size(); ++i)
            if (rho[i] != 1.0) out.push_back(i);
        return out;
    }

    /// Union of supp(rho - 1), supp(f), supp(g); measurement points must stay
    /// clear of these voxels.
    std::vector<int> support_voxels() const {
        std::vector<int> out;
        for (int i = 0; i < rho.size(); ++i)
            if (rho[i] != 1.0 || f[i] != 0.0 || g[i] != 0.0) out.push_back(i);
        return out;
    }

    ScalarFieldR rho_f_product() const {
        ScalarFieldR p(rho.grid);
        for (int i = 0; i < p.size(); ++i) p[i] = rho[i] * f[i];
        return p;
    }

    ScalarFieldR rho_g_product() const {
        ScalarFieldR p(rho.grid);
        for (int i = 0; i < p.size(); ++i) p[i] = rho[i] * g[i];
        return p;
    }

private:
    void check_column_invariance() const {
        const auto& n = rho.grid->dims();
        for (int iy = 0; iy < n[1]; ++iy)
            for (int ix = 0; ix < n[0]; ++ix) {
                bool have = false;
                double r0 = 0, f0 = 0, g0 = 0;
                for (int iz = 0; iz < n[2]; ++iz) {
                    const int i = rho.grid->index(ix, iy, iz);
                    if (!domain.omega_mask[static_cast<size_t>(i)]) continue;
                    if (!have) {
                        r0 = rho[i];
                        f0 = f[i];
                        g0 = g[i];
                        have = true;
                        continue;
                    }
                    if (rho[i] != r0 || f[i] != f0 || g[i] != g0)
                        throw input_error("MediumConfig: fields are not invariant along the declared axis");
                }
            }
    }
};

} // namespace plateinv
