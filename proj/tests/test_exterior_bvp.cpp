#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "plateinv/exterior.hpp"

using namespace plateinv;

namespace {

// traces of the point-source field G_kappa(|x - y0|) on a mesh
ExteriorBoundaryData point_source_data(const SphereMesh& mesh, const WaveNumber& wn, const Vec3& y0) {
    std::vector<Complex> u(mesh.nodes.size()), lap(mesh.nodes.size());
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double r = (mesh.nodes[i] - y0).norm();
        u[i] = biharmonic_green(wn, r);
        lap[i] = laplacian_biharmonic_green(wn, r);
    }
    return ExteriorBoundaryData(mesh, wn, std::move(u), std::move(lap));
}

// 7-point FD Laplacian of a layer-part field
template <typename F>
Complex fd_laplacian(F&& field, const Vec3& x, double h) {
    Complex acc = -6.0 * field(x);
    for (int a = 0; a < 3; ++a) {
        Vec3 dx = Vec3::Zero();
        dx[a] = h;
        acc += field(x + dx) + field(x - dx);
    }
    return acc / (h * h);
}

} // namespace

TEST_CASE("boundary operators reach the classical static limits") {
    const double a = 1.0;
    const auto mesh = make_sphere_mesh(a, 12, 24);
    const auto ops = assemble_boundary_ops(mesh, WaveNumber(1e-4));
    const int nn = mesh.node_count();
    Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(nn);

    // Laplace single layer on the unit sphere maps 1 to 1
    const Eigen::VectorXcd sh1 = ops.SH * ones;
    const Eigen::VectorXcd sm1 = ops.SM * ones;
    for (int i = 0; i < nn; ++i) {
        REQUIRE(std::abs(sh1(i) - Complex(a, 0)) < 1e-3 * a);  // O(kappa) away from static
        REQUIRE(std::abs(sm1(i) - Complex(a, 0)) < 1e-3 * a);
    }
    // interior-limit convention: PV double layer maps 1 to -1/2
    const Eigen::VectorXcd kh1 = ops.KH * ones;
    const Eigen::VectorXcd km1 = ops.KM * ones;
    for (int i = 0; i < nn; ++i) {
        REQUIRE(std::abs(kh1(i) - Complex(-0.5, 0)) < 1e-3);
        REQUIRE(std::abs(km1(i) - Complex(-0.5, 0)) < 1e-3);
    }

    // quadrature oracle for the static single layer: exact value a for |x| = a
    // (Gauss integral of 1/(4 pi |x-y|) over the sphere)
    const double exact = a;
    REQUIRE(std::abs(sh1(0).real() - exact) < 1e-3);
}

TEST_CASE("single-layer kernel matrices are symmetric") {
    const auto mesh = make_sphere_mesh(0.7, 10, 20);
    const auto ops = assemble_boundary_ops(mesh, WaveNumber(0.8));
    double worst = 0.0;
    for (int i = 0; i < mesh.node_count(); i += 7)
        for (int j = 0; j < mesh.node_count(); j += 5) {
            const Complex kij = ops.SH(i, j) / mesh.weights[static_cast<size_t>(j)];
            const Complex kji = ops.SH(j, i) / mesh.weights[static_cast<size_t>(i)];
            worst = std::max(worst, std::abs(kij - kji));
        }
    REQUIRE(worst <= 1e-8);
}

TEST_CASE("zero data gives zero densities") {
    const auto mesh = make_sphere_mesh(0.7, 8, 16);
    const WaveNumber k(0.5);
    std::vector<Complex> z(mesh.nodes.size(), Complex{0, 0});
    ExteriorBoundaryData data(mesh, k, z, z);
    const auto dens = solve_combined(data);
    for (const auto& v : dens.varphi) REQUIRE(std::abs(v) <= 1e-14);
    for (const auto& v : dens.psi) REQUIRE(std::abs(v) <= 1e-14);
    REQUIRE_THROWS_AS(solve_combined(data, 0.0), input_error);
}

TEST_CASE("manufactured point source is reproduced outside") {
    const double a = 0.7;
    const auto mesh = make_sphere_mesh(a, 16, 32);
    const WaveNumber k(0.6);
    const Vec3 y0(0.1, -0.05, 0.2);
    const auto data = point_source_data(mesh, k, y0);
    const auto dens = solve_combined(data);

    std::vector<Vec3> targets;
    for (double r : {1.2, 1.5, 2.0})
        for (const Vec3& d : {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(-0.6, 0.64, 0.48)})
            targets.push_back(r * d.normalized());
    const auto tr = eval_exterior(mesh, dens, k, targets);
    double worst_u = 0, scale_u = 0, worst_l = 0, scale_l = 0;
    for (size_t t = 0; t < targets.size(); ++t) {
        const double r = (targets[t] - y0).norm();
        const Complex want_u = biharmonic_green(k, r);
        const Complex want_l = laplacian_biharmonic_green(k, r);
        worst_u = std::max(worst_u, std::abs(tr.u[t] - want_u));
        worst_l = std::max(worst_l, std::abs(tr.lap_u[t] - want_l));
        scale_u = std::max(scale_u, std::abs(want_u));
        scale_l = std::max(scale_l, std::abs(want_l));
    }
    REQUIRE(worst_u <= 1e-6 * scale_u);
    REQUIRE(worst_l <= 1e-6 * scale_l);
}

TEST_CASE("pure Helmholtz data leaves the modified density empty") {
    const auto mesh = make_sphere_mesh(0.7, 10, 20);
    const WaveNumber k(0.5);
    // phi2 = -kappa^2 phi1 makes the psi right side vanish
    std::vector<Complex> phi1(mesh.nodes.size()), phi2(mesh.nodes.size());
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double r = (mesh.nodes[i] - Vec3(0.05, 0.1, -0.08)).norm();
        phi1[i] = helmholtz_green(k, r);
        phi2[i] = -k.kappa * k.kappa * phi1[i];
    }
    ExteriorBoundaryData data(mesh, k, phi1, phi2);
    const auto dens = solve_combined(data);
    double psi_norm = 0, phi_norm = 0;
    for (size_t i = 0; i < dens.psi.size(); ++i) {
        psi_norm = std::max(psi_norm, std::abs(dens.psi[i]));
        phi_norm = std::max(phi_norm, std::abs(dens.varphi[i]));
    }
    REQUIRE(psi_norm <= 1e-12 * phi_norm);
}

TEST_CASE("jump relation: the composite operator reproduces phi1") {
    const auto mesh = make_sphere_mesh(0.7, 12, 24);
    const WaveNumber k(0.7);
    const auto data = point_source_data(mesh, k, Vec3(0.12, 0.03, -0.1));
    const auto ops = assemble_boundary_ops(mesh, k);
    const auto dens = solve_combined(data, k.kappa, &ops);
    const int nn = mesh.node_count();
    Eigen::VectorXcd vphi(nn), vpsi(nn);
    for (int i = 0; i < nn; ++i) {
        vphi(i) = dens.varphi[static_cast<size_t>(i)];
        vpsi(i) = dens.psi[static_cast<size_t>(i)];
    }
    const Eigen::MatrixXcd half = 0.5 * Eigen::MatrixXcd::Identity(nn, nn);
    const Eigen::VectorXcd trace = (-kImag * k.kappa * ops.SH + ops.KH + half) * vphi +
                                   (-kImag * k.kappa * ops.SM + ops.KM + half) * vpsi;
    double worst = 0, scale = 0;
    for (int i = 0; i < nn; ++i) {
        worst = std::max(worst, std::abs(trace(i) - data.phi1[static_cast<size_t>(i)]));
        scale = std::max(scale, std::abs(data.phi1[static_cast<size_t>(i)]));
    }
    REQUIRE(worst <= 1e-6 * scale);
}

TEST_CASE("gamma independence of the exterior field") {
    const auto mesh = make_sphere_mesh(0.7, 14, 28);
    const WaveNumber k(0.5);
    const auto data = point_source_data(mesh, k, Vec3(0.0, 0.15, 0.1));
    const auto d1 = solve_combined(data, k.kappa);
    const auto d2 = solve_combined(data, 1.0);
    std::vector<Vec3> targets = {Vec3(1.4, 0, 0.3), Vec3(-0.8, 1.1, 0), Vec3(0, -1.3, 0.9)};
    const auto t1 = eval_exterior(mesh, d1, k, targets);
    const auto t2 = eval_exterior(mesh, d2, k, targets);
    double worst = 0, scale = 0;
    for (size_t t = 0; t < targets.size(); ++t) {
        worst = std::max(worst, std::abs(t1.u[t] - t2.u[t]));
        worst = std::max(worst, std::abs(t1.lap_u[t] - t2.lap_u[t]));
        scale = std::max(scale, std::abs(t1.u[t]));
    }
    REQUIRE(worst <= 1e-6 * scale);
}

TEST_CASE("the two layer halves satisfy their own Helmholtz equations") {
    const auto mesh = make_sphere_mesh(0.7, 12, 24);
    const WaveNumber k(0.8);
    const auto data = point_source_data(mesh, k, Vec3(0.1, 0.1, 0.0));
    const auto dens = solve_combined(data);
    const double h = 1e-3;
    auto uh = [&](const Vec3& x) { return eval_layer_parts(mesh, dens, k, {x}).u_h[0]; };
    auto um = [&](const Vec3& x) { return eval_layer_parts(mesh, dens, k, {x}).u_m[0]; };
    const double k2 = k.kappa * k.kappa;
    for (const Vec3& x : {Vec3(1.3, 0.2, -0.4), Vec3(-0.9, 0.8, 0.7)}) {
        const Complex rh = fd_laplacian(uh, x, h) + k2 * uh(x);
        const Complex rm = fd_laplacian(um, x, h) - k2 * um(x);
        const double scale = std::max({std::abs(uh(x)) * k2, std::abs(um(x)) * k2, 1e-12});
        REQUIRE(std::abs(rh) <= 1e-5 * std::max(scale, 1.0));
        REQUIRE(std::abs(rm) <= 1e-5 * std::max(scale, 1.0));
    }
}

TEST_CASE("targets on or inside the sphere are rejected") {
    const auto mesh = make_sphere_mesh(0.7, 8, 16);
    const WaveNumber k(0.5);
    LayerDensities dens;
    dens.gamma = k.kappa;
    dens.varphi.assign(mesh.nodes.size(), Complex{0, 0});
    dens.psi.assign(mesh.nodes.size(), Complex{0, 0});
    REQUIRE_THROWS_AS(eval_exterior(mesh, dens, k, {Vec3(0.3, 0, 0)}), geometry_error);
    REQUIRE_THROWS_AS(eval_exterior(mesh, dens, k, {Vec3(0.7, 0, 0)}), geometry_error);
}

TEST_CASE("continuation from the inner sphere matches direct measurement") {
    // forward data measured on the boundary of Omega, continued to B_R
    auto grid = make_grid(12, Vec3(-1, -1, -1), Vec3(1, 1, 1));
    const double a = 0.7, R = 1.5;
    Mask omega = ball_mask(grid, Vec3::Zero(), a - 0.25); // sources well inside the layer sphere
    DomainSpec dom(grid, omega, R);
    ScalarFieldR rho(grid, 1.0);
    for (int i = 0; i < rho.size(); ++i)
        if (grid->center(i).norm() < 0.25) rho[i] = 1.5;
    MediumConfig cfg(dom, rho, masked_field(grid, omega, Profile::gaussian(0.5, Vec3(0.08, 0, 0), 0.12)),
                     masked_field(grid, omega, Profile::gaussian(1.0, Vec3(0, -0.06, 0.05), 0.12)));

    const WaveNumber k(0.35);
    const auto u = solve_dense(cfg, k);
    const auto inner_mesh = make_sphere_mesh(a, 16, 32);
    const auto outer_mesh = make_sphere_mesh(R, 10, 20);
    const auto inner = measure(cfg, u, k, inner_mesh);
    const auto outer_direct = measure(cfg, u, k, outer_mesh);

    ExteriorBoundaryData data(inner_mesh, k, inner.u, inner.lap_u);
    const auto continued = continue_measurement(data, outer_mesh);

    double worst = 0, scale = 0;
    for (int i = 0; i < outer_mesh.node_count(); ++i) {
        const size_t q = static_cast<size_t>(i);
        worst = std::max(worst, std::abs(continued.u[q] - outer_direct.u[q]));
        worst = std::max(worst, std::abs(continued.lap_u[q] - outer_direct.lap_u[q]));
        scale = std::max({scale, std::abs(outer_direct.u[q]), std::abs(outer_direct.lap_u[q])});
    }
    REQUIRE(worst <= 1e-4 * scale);

    // radiation quantities of the continued field decay with radius
    const auto dens = solve_combined(data);
    std::vector<double> rq, lq;
    for (double r : {2 * R, 4 * R, 8 * R}) {
        const double dr = 1e-3 * r;
        double worst_u = 0, worst_l = 0;
        for (const Vec3& d : {Vec3(1, 0, 0), Vec3(0, 0.6, 0.8), Vec3(-0.5, 0.5, std::sqrt(0.5))}) {
            const Vec3 dd = d.normalized();
            const auto tr = eval_exterior(data.mesh, dens, k,
                                          {(r + dr) * dd, (r - dr) * dd, r * dd});
            const Complex du = (tr.u[0] - tr.u[1]) / (2 * dr);
            const Complex dl = (tr.lap_u[0] - tr.lap_u[1]) / (2 * dr);
            worst_u = std::max(worst_u, std::abs(r * (du - kImag * k.kappa * tr.u[2])));
            worst_l = std::max(worst_l, std::abs(r * (dl - kImag * k.kappa * tr.lap_u[2])));
        }
        rq.push_back(worst_u);
        lq.push_back(worst_l);
    }
    REQUIRE(rq[1] < rq[0]);
    REQUIRE(rq[2] < rq[1]);
    REQUIRE(lq[1] < lq[0]);
    REQUIRE(lq[2] < lq[1]);
}
