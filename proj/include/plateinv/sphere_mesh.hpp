#pragma once

#include <vector>

#include "plateinv/grid.hpp"
#include "plateinv/special_functions.hpp"
#include "plateinv/spherical_harmonics.hpp"

namespace plateinv {

/// Quadrature mesh on a sphere: Gauss-Legendre in the polar angle times a
/// uniform longitude grid. Weights sum to the sphere area; integrals of
/// Y_m conj(Y_m') are exact while m + m' stays within max_exact_degree().
struct SphereMesh {
    double radius = 1.0;
    int n_theta = 0;
    int n_phi = 0;
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::vector<Vec3> normals; // outward unit normals

    int node_count() const { return static_cast<int>(nodes.size()); }

    /// Largest polynomial degree integrated exactly over the sphere.
    int max_exact_degree() const { return std::min(2 * n_theta - 1, n_phi - 1); }

    /// Largest harmonic degree whose projection from an equally band-limited
    /// field is exact.
    int exact_projection_degree() const { return std::min(n_theta - 1, (n_phi - 1) / 2); }

    /// Projection of nodal samples onto conj(Y_m^n) over the unit sphere, for
    /// every m <= m_max, node-order deterministic.
    std::vector<Complex> project(const std::vector<Complex>& samples, int m_max) const {
        if (static_cast<int>(samples.size()) != node_count())
            throw input_error("SphereMesh::project: sample count mismatch");
        std::vector<Complex> acc(static_cast<size_t>(sh_count(m_max)), Complex{0.0, 0.0});
        const double r2 = radius * radius;
        for (int i = 0; i < node_count(); ++i) {
            const auto basis = sh_basis(nodes[static_cast<size_t>(i)] / radius, m_max);
            const Complex sw = samples[static_cast<size_t>(i)] * (weights[static_cast<size_t>(i)] / r2);
            for (size_t k = 0; k < basis.size(); ++k) acc[k] += sw * std::conj(basis[k]);
        }
        return acc;
    }
};

inline SphereMesh make_sphere_mesh(double radius, int n_theta, int n_phi) {
    if (radius <= 0.0) throw input_error("make_sphere_mesh: radius must be positive");
    if (n_theta < 2 || n_phi < 4) throw input_error("make_sphere_mesh: mesh too small");
    SphereMesh mesh;
    mesh.radius = radius;
    mesh.n_theta = n_theta;
    mesh.n_phi = n_phi;
    const auto gl = gauss_legendre(n_theta);
    const double dphi = 2.0 * kPi / n_phi;
    mesh.nodes.reserve(static_cast<size_t>(n_theta * n_phi));
    for (int it = 0; it < n_theta; ++it) {
        const double ct = gl.nodes[static_cast<size_t>(it)];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = dphi * ip;
            const Vec3 dir(st * std::cos(phi), st * std::sin(phi), ct);
            mesh.nodes.push_back(radius * dir);
            mesh.normals.push_back(dir);
            mesh.weights.push_back(gl.weights[static_cast<size_t>(it)] * dphi * radius * radius);
        }
    }
    return mesh;
}

} // namespace plateinv
