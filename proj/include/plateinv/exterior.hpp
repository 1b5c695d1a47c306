#pragma once

#include <Eigen/Dense>

#include "plateinv/forward.hpp"
#include "plateinv/kernels.hpp"
#include "plateinv/sphere_mesh.hpp"
#include "plateinv/special_functions.hpp"

namespace plateinv {

/// Dirichlet-type data of the exterior problem: traces of u and Delta u on the
/// spherical surface the layers live on.
struct ExteriorBoundaryData {
    SphereMesh mesh;
    WaveNumber kappa;
    std::vector<Complex> phi1; // u on the boundary
    std::vector<Complex> phi2; // Delta u on the boundary

    ExteriorBoundaryData(SphereMesh m, WaveNumber k, std::vector<Complex> u_trace,
                         std::vector<Complex> lap_trace)
        : mesh(std::move(m)), kappa(k), phi1(std::move(u_trace)), phi2(std::move(lap_trace)) {
        if (static_cast<int>(phi1.size()) != mesh.node_count() ||
            static_cast<int>(phi2.size()) != mesh.node_count())
            throw input_error("ExteriorBoundaryData: trace length does not match the mesh");
    }
};

/// Combined-field layer densities for the Helmholtz (varphi) and modified
/// Helmholtz (psi) halves, with the nonzero coupling constant gamma.
struct LayerDensities {
    std::vector<Complex> varphi;
    std::vector<Complex> psi;
    double gamma = 0.0;
};

/// Dense boundary operators on a sphere: single layers S and principal-value
/// double layers K for the Helmholtz and modified Helmholtz kernels, with the
/// sign convention that (K + 1/2) is the exterior trace of the double layer.
struct BoundaryOperators {
    Eigen::MatrixXcd SH, SM, KH, KM;
    int m_max = 0;
};

namespace detail {

/// Single-layer eigenvalue on a sphere of radius a, wavenumber z0 (complex to
/// cover the modified kernel): i k a^2 j_m(k a) h_m(k a).
inline Complex single_layer_eig(int m, Complex k, double a) {
    return kImag * k * a * a * sph_bessel_j(m, k * a) * sph_hankel1(m, k * a);
}

/// Principal-value double-layer eigenvalue: i k^2 a^2 j_m'(k a) h_m(k a) - 1/2.
inline Complex double_layer_eig(int m, Complex k, double a) {
    return kImag * k * k * a * a * sph_bessel_j_prime(m, k * a) * sph_hankel1(m, k * a) - 0.5;
}

/// Assemble B diag(lambda) B^* W from eigenvalues; exact on densities band-
/// limited to the mesh's projection degree.
inline Eigen::MatrixXcd spectral_operator(const SphereMesh& mesh,
                                          const std::vector<Complex>& eig_by_degree, int m_max) {
    const int nn = mesh.node_count();
    const int nl = sh_count(m_max);
    Eigen::MatrixXcd basis(nn, nl);
    for (int i = 0; i < nn; ++i) {
        const auto b = sh_basis(mesh.nodes[static_cast<size_t>(i)] / mesh.radius, m_max);
        for (int k = 0; k < nl; ++k) basis(i, k) = b[static_cast<size_t>(k)];
    }
    Eigen::MatrixXcd scaled = basis;
    for (int m = 0; m <= m_max; ++m)
        for (int n = -m; n <= m; ++n) scaled.col(sh_flat(m, n)) *= eig_by_degree[static_cast<size_t>(m)];
    const double r2 = mesh.radius * mesh.radius;
    Eigen::MatrixXcd proj(nl, nn);
    for (int j = 0; j < nn; ++j)
        proj.col(j) = basis.row(j).adjoint() * (mesh.weights[static_cast<size_t>(j)] / r2);
    return scaled * proj;
}

} // namespace detail

/// Boundary operator assembly; the default truncation uses the full projection
/// degree the mesh supports.
inline BoundaryOperators assemble_boundary_ops(const SphereMesh& mesh, const WaveNumber& wn,
                                               int m_max = -1) {
    if (m_max < 0) m_max = mesh.exact_projection_degree();
    if (m_max > mesh.exact_projection_degree())
        throw input_error("assemble_boundary_ops: truncation degree beyond the mesh accuracy");
    const double a = mesh.radius;
    const Complex kh(wn.kappa, 0.0);
    const Complex km = kImag * wn.kappa; // modified kernel is Helmholtz at i kappa

    std::vector<Complex> sh(static_cast<size_t>(m_max + 1)), sm(sh.size()), khd(sh.size()), kmd(sh.size());
    for (int m = 0; m <= m_max; ++m) {
        sh[static_cast<size_t>(m)] = detail::single_layer_eig(m, kh, a);
        sm[static_cast<size_t>(m)] = detail::single_layer_eig(m, km, a);
        khd[static_cast<size_t>(m)] = detail::double_layer_eig(m, kh, a);
        kmd[static_cast<size_t>(m)] = detail::double_layer_eig(m, km, a);
    }
    BoundaryOperators ops;
    ops.m_max = m_max;
    ops.SH = detail::spectral_operator(mesh, sh, m_max);
    ops.SM = detail::spectral_operator(mesh, sm, m_max);
    ops.KH = detail::spectral_operator(mesh, khd, m_max);
    ops.KM = detail::spectral_operator(mesh, kmd, m_max);
    return ops;
}

/// Solve the two decoupled combined-field systems
/// (-i gamma S^H + K^H + 1/2) varphi = (phi1 - phi2/kappa^2) / 2 and
/// (-i gamma S^M + K^M + 1/2) psi    = (phi1 + phi2/kappa^2) / 2.
inline LayerDensities solve_combined(const ExteriorBoundaryData& data, double gamma,
                                     const BoundaryOperators* prebuilt = nullptr) {
    if (gamma == 0.0) throw input_error("solve_combined: gamma must be nonzero");
    const int nn = data.mesh.node_count();
    BoundaryOperators local;
    const BoundaryOperators& ops = prebuilt ? *prebuilt : (local = assemble_boundary_ops(data.mesh, data.kappa), local);

    const double k2 = data.kappa.kappa * data.kappa.kappa;
    Eigen::VectorXcd rhs_h(nn), rhs_m(nn);
    for (int i = 0; i < nn; ++i) {
        rhs_h(i) = 0.5 * (data.phi1[static_cast<size_t>(i)] - data.phi2[static_cast<size_t>(i)] / k2);
        rhs_m(i) = 0.5 * (data.phi1[static_cast<size_t>(i)] + data.phi2[static_cast<size_t>(i)] / k2);
    }
    const Eigen::MatrixXcd half = 0.5 * Eigen::MatrixXcd::Identity(nn, nn);
    const Eigen::MatrixXcd ah = -kImag * gamma * ops.SH + ops.KH + half;
    const Eigen::MatrixXcd am = -kImag * gamma * ops.SM + ops.KM + half;

    Eigen::PartialPivLU<Eigen::MatrixXcd> luh(ah), lum(am);
    if (luh.rcond() < 1e-12 || lum.rcond() < 1e-12)
        throw conditioning_error("solve_combined: combined-field system near singular; try a "
                                 "different gamma (default gamma = kappa)",
                                 1.0 / std::min(luh.rcond(), lum.rcond()));
    Eigen::VectorXcd vh = luh.solve(rhs_h);
    Eigen::VectorXcd vm = lum.solve(rhs_m);

    LayerDensities dens;
    dens.gamma = gamma;
    dens.varphi.assign(vh.data(), vh.data() + nn);
    dens.psi.assign(vm.data(), vm.data() + nn);
    return dens;
}

inline LayerDensities solve_combined(const ExteriorBoundaryData& data) {
    return solve_combined(data, data.kappa.kappa);
}

/// The Helmholtz and modified-Helmholtz halves of the combined field at
/// exterior targets: u_X = (D_X - i gamma S_X)[density_X].
struct LayerParts {
    std::vector<Complex> u_h;
    std::vector<Complex> u_m;
};

inline LayerParts eval_layer_parts(const SphereMesh& mesh, const LayerDensities& dens,
                                   const WaveNumber& wn, const std::vector<Vec3>& targets) {
    LayerParts parts;
    parts.u_h.assign(targets.size(), Complex{0, 0});
    parts.u_m.assign(targets.size(), Complex{0, 0});
    const double k = wn.kappa;
    parallel_for(static_cast<int>(targets.size()), [&](int t) {
        const Vec3 x = targets[static_cast<size_t>(t)];
        Complex ah{0, 0}, am{0, 0};
        for (int j = 0; j < mesh.node_count(); ++j) {
            const size_t q = static_cast<size_t>(j);
            const Vec3 d = mesh.nodes[q] - x;
            const double r = d.norm();
            const double cosn = d.dot(mesh.normals[q]) / r;
            const Complex gh = helmholtz_green(wn, r);
            const double gm = modified_helmholtz_green(wn, r);
            const Complex dgh = std::exp(kImag * (k * r)) * (kImag * (k * r) - 1.0) / (4.0 * kPi * r * r) * cosn;
            const double dgm = std::exp(-k * r) * (-k * r - 1.0) / (4.0 * kPi * r * r) * cosn;
            ah += mesh.weights[q] * (dgh - kImag * dens.gamma * gh) * dens.varphi[q];
            am += mesh.weights[q] * (dgm - kImag * dens.gamma * gm) * dens.psi[q];
        }
        parts.u_h[static_cast<size_t>(t)] = ah;
        parts.u_m[static_cast<size_t>(t)] = am;
    });
    return parts;
}

/// Combined field (u, Delta u) at targets strictly outside the layer sphere;
/// the Laplacian acts as -kappa^2 on the Helmholtz half and +kappa^2 on the
/// modified half.
inline BoundaryTrace eval_exterior(const SphereMesh& mesh, const LayerDensities& dens,
                                   const WaveNumber& wn, const std::vector<Vec3>& targets) {
    for (const auto& x : targets)
        if (x.norm() <= mesh.radius)
            throw geometry_error("eval_exterior: target on or inside the layer sphere");
    const auto parts = eval_layer_parts(mesh, dens, wn, targets);
    const double k2 = wn.kappa * wn.kappa;
    BoundaryTrace tr;
    tr.u.resize(targets.size());
    tr.lap_u.resize(targets.size());
    for (size_t t = 0; t < targets.size(); ++t) {
        tr.u[t] = parts.u_h[t] + parts.u_m[t];
        tr.lap_u[t] = k2 * (parts.u_m[t] - parts.u_h[t]);
    }
    return tr;
}

/// Continue measured (u, Delta u) data from the sphere it was taken on to the
/// nodes of another sphere mesh.
inline BoundaryTrace continue_measurement(const ExteriorBoundaryData& data, const SphereMesh& target_mesh,
                                          double gamma = 0.0) {
    const auto dens = (gamma == 0.0) ? solve_combined(data) : solve_combined(data, gamma);
    return eval_exterior(data.mesh, dens, data.kappa, target_mesh.nodes);
}

} // namespace plateinv
