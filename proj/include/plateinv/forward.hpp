#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "plateinv/kernels.hpp"
#include "plateinv/medium.hpp"
#include "plateinv/sphere_mesh.hpp"
#include "plateinv/threading.hpp"

namespace plateinv {

/// Boundary traces of (u, Delta u) on one mesh.
struct BoundaryTrace {
    std::vector<Complex> u;
    std::vector<Complex> lap_u;
};

/// Passive boundary data over a wavenumber sweep.
struct MeasurementSet {
    SphereMesh mesh;
    std::vector<double> kappas;
    std::vector<BoundaryTrace> traces; // one per kappa
};

/// Source density of the frequency-domain plate equation:
/// s(y) = -(i kappa^2 / 2 pi) rho f + (1 / 2 pi) rho g, supported in Omega.
inline ScalarFieldC rhs_field(const MediumConfig& cfg, const WaveNumber& wn) {
    ScalarFieldC s(cfg.rho.grid);
    const Complex cf = -kImag * wn.kappa * wn.kappa / (2.0 * kPi);
    const double cg = 1.0 / (2.0 * kPi);
    for (int i = 0; i < s.size(); ++i) s[i] = cf * (cfg.rho[i] * cfg.f[i]) + cg * (cfg.rho[i] * cfg.g[i]);
    return s;
}

/// Volume potential of a grid source against G_kappa, evaluated at every voxel
/// center. The coincident voxel uses the continuous r -> 0 kernel limit.
inline ScalarFieldC volume_potential_grid(const ScalarFieldC& s, const WaveNumber& wn,
                                          const std::vector<int>& source_voxels) {
    ScalarFieldC out(s.grid);
    const double vol = s.grid->voxel_volume();
    const auto& grid = *s.grid;
    parallel_for(out.size(), [&](int i) {
        const Vec3 x = grid.center(i);
        Complex acc{0.0, 0.0};
        for (int j : source_voxels) {
            const double r = (x - grid.center(j)).norm();
            acc += s[j] * biharmonic_green(wn, r);
        }
        out[i] = acc * vol;
    });
    return out;
}

/// Contrast operator of the Lippmann-Schwinger equation:
/// (K u)(x) = kappa^4 sum_y (rho(y) - 1) u(y) G_kappa(|x - y|) h^3.
inline ScalarFieldC ls_apply_K(const MediumConfig& cfg, const WaveNumber& wn, const ScalarFieldC& u) {
    require_same_grid(cfg.rho, u, "ls_apply_K");
    ScalarFieldC out(u.grid);
    const auto contrast = cfg.contrast_voxels();
    if (contrast.empty()) return out;
    const double vol = u.grid->voxel_volume();
    const double k4 = std::pow(wn.kappa, 4);
    const auto& grid = *u.grid;
    parallel_for(out.size(), [&](int i) {
        const Vec3 x = grid.center(i);
        Complex acc{0.0, 0.0};
        for (int j : contrast) {
            const double r = (x - grid.center(j)).norm();
            acc += (cfg.rho[j] - 1.0) * u[j] * biharmonic_green(wn, r);
        }
        out[i] = acc * (k4 * vol);
    });
    return out;
}

/// Sufficient Neumann-series bound: the series contracts when
/// kappa^2 < 2 / (M R^2) with M = sup |rho - 1|.
inline double neumann_kappa2_bound(const MediumConfig& cfg) {
    const double m = cfg.contrast_bound();
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 / (m * cfg.domain.R * cfg.domain.R);
}

struct NeumannOptions {
    double tol = 1e-13; // on the increment max-norm, relative to the Born term
    int max_terms = 200;
};

/// Neumann-series solution u = sum_j K^j S with S the volume potential of the
/// source density. Refuses wavenumbers outside the contraction bound.
inline ScalarFieldC solve_neumann(const MediumConfig& cfg, const WaveNumber& wn,
                                  const NeumannOptions& opt = {},
                                  std::vector<double>* increment_norms = nullptr) {
    if (!(opt.tol > 0.0)) throw input_error("solve_neumann: tol must be positive");
    if (wn.kappa * wn.kappa >= neumann_kappa2_bound(cfg))
        throw bound_violation_error(
            "solve_neumann: kappa^2 exceeds 2/(M R^2); use solve_dense for this wavenumber");
    const auto omega = cfg.domain.omega_voxels();
    const ScalarFieldC s = rhs_field(cfg, wn);
    ScalarFieldC u = volume_potential_grid(s, wn, omega);
    double scale = 0.0;
    for (int i = 0; i < u.size(); ++i) scale = std::max(scale, std::abs(u[i]));
    if (scale == 0.0) return u;

    ScalarFieldC term = u;
    for (int j = 1; j <= opt.max_terms; ++j) {
        term = ls_apply_K(cfg, wn, term);
        double inc = 0.0;
        for (int i = 0; i < u.size(); ++i) {
            u[i] += term[i];
            inc = std::max(inc, std::abs(term[i]));
        }
        if (increment_norms) increment_norms->push_back(inc);
        if (inc <= opt.tol * scale) return u;
    }
    throw divergence_error("solve_neumann: no convergence within the term budget");
}

/// Direct collocation solve of (I - K) u = S restricted to the contrast
/// voxels, then one potential application to recover u on the whole grid.
inline ScalarFieldC solve_dense(const MediumConfig& cfg, const WaveNumber& wn,
                                int max_unknowns = 16384) {
    const auto contrast = cfg.contrast_voxels();
    const auto omega = cfg.domain.omega_voxels();
    const ScalarFieldC s = rhs_field(cfg, wn);
    ScalarFieldC born = volume_potential_grid(s, wn, omega);
    if (contrast.empty()) return born;
    const int nc = static_cast<int>(contrast.size());
    if (nc > max_unknowns)
        throw input_error("solve_dense: contrast system exceeds the dense-solver guard");

    const double vol = cfg.rho.grid->voxel_volume();
    const double k4 = std::pow(wn.kappa, 4);
    const auto& grid = *cfg.rho.grid;

    Eigen::MatrixXcd a(nc, nc);
    parallel_for(nc, [&](int row) {
        const Vec3 x = grid.center(contrast[static_cast<size_t>(row)]);
        for (int col = 0; col < nc; ++col) {
            const int j = contrast[static_cast<size_t>(col)];
            const double r = (x - grid.center(j)).norm();
            a(row, col) = -k4 * vol * (cfg.rho[j] - 1.0) * biharmonic_green(wn, r);
        }
        a(row, row) += 1.0;
    });
    Eigen::VectorXcd rhs(nc);
    for (int row = 0; row < nc; ++row) rhs(row) = born[contrast[static_cast<size_t>(row)]];

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    Eigen::VectorXcd uc = lu.solve(rhs);
    const double resid = (a * uc - rhs).norm();
    if (!(resid <= 1e-8 * (rhs.norm() + 1e-300)))
        throw conditioning_error("solve_dense: collocation system is numerically singular",
                                 resid / (rhs.norm() + 1e-300));

    // u = S + K u on the full grid, using the solved contrast values
    ScalarFieldC ufield(cfg.rho.grid);
    for (int c = 0; c < nc; ++c) ufield[contrast[static_cast<size_t>(c)]] = uc(c);
    ScalarFieldC ku = ls_apply_K(cfg, wn, ufield);
    for (int i = 0; i < born.size(); ++i) born[i] += ku[i];
    return born;
}

/// Evaluate the integral representation of (u, Delta u) at arbitrary points
/// strictly off the support voxels.
inline BoundaryTrace eval_representation(const MediumConfig& cfg, const ScalarFieldC& u,
                                         const WaveNumber& wn, const std::vector<Vec3>& points) {
    require_same_grid(cfg.rho, u, "eval_representation");
    const auto contrast = cfg.contrast_voxels();
    const auto omega = cfg.domain.omega_voxels();
    const ScalarFieldC s = rhs_field(cfg, wn);
    const double vol = cfg.rho.grid->voxel_volume();
    const double k4 = std::pow(wn.kappa, 4);
    const auto& grid = *cfg.rho.grid;

    BoundaryTrace tr;
    tr.u.assign(points.size(), Complex{0, 0});
    tr.lap_u.assign(points.size(), Complex{0, 0});
    parallel_for(static_cast<int>(points.size()), [&](int p) {
        const Vec3 x = points[static_cast<size_t>(p)];
        Complex au{0, 0}, al{0, 0};
        for (int j : contrast) {
            const double r = (x - grid.center(j)).norm();
            const Complex w = (cfg.rho[j] - 1.0) * u[j];
            au += w * biharmonic_green(wn, r);
            al += w * laplacian_biharmonic_green(wn, r);
        }
        au *= k4;
        al *= k4;
        for (int j : omega) {
            if (s[j] == Complex{0, 0}) continue;
            const double r = (x - grid.center(j)).norm();
            au += s[j] * biharmonic_green(wn, r);
            al += s[j] * laplacian_biharmonic_green(wn, r);
        }
        tr.u[static_cast<size_t>(p)] = au * vol;
        tr.lap_u[static_cast<size_t>(p)] = al * vol;
    });
    return tr;
}

/// Passive measurement on a sphere mesh; every node must stay clear of the
/// source supports.
inline BoundaryTrace measure(const MediumConfig& cfg, const ScalarFieldC& u, const WaveNumber& wn,
                             const SphereMesh& mesh) {
    const auto support = cfg.support_voxels();
    const double clearance = cfg.rho.grid->half_diagonal();
    for (const auto& node : mesh.nodes)
        for (int j : support)
            if ((node - cfg.rho.grid->center(j)).norm() < clearance)
                throw geometry_error("measure: mesh node inside a source-support voxel");
    return eval_representation(cfg, u, wn, mesh.nodes);
}

/// Solver policy used by sweep: Neumann while the contraction ratio stays at or
/// below 1/2, dense otherwise.
inline ScalarFieldC solve_auto(const MediumConfig& cfg, const WaveNumber& wn) {
    if (wn.kappa * wn.kappa <= 0.5 * neumann_kappa2_bound(cfg)) return solve_neumann(cfg, wn);
    return solve_dense(cfg, wn);
}

/// Forward-synthesize the measurement map over a strictly increasing kappa list.
inline MeasurementSet sweep(const MediumConfig& cfg, const std::vector<double>& kappas,
                            const SphereMesh& mesh) {
    if (kappas.empty()) throw input_error("sweep: empty kappa list");
    for (size_t k = 1; k < kappas.size(); ++k)
        if (!(kappas[k] > kappas[k - 1])) throw input_error("sweep: kappa list must be strictly increasing");
    MeasurementSet ms;
    ms.mesh = mesh;
    ms.kappas = kappas;
    ms.traces.reserve(kappas.size());
    for (double k : kappas) {
        const WaveNumber wn(k);
        const ScalarFieldC u = solve_auto(cfg, wn);
        ms.traces.push_back(measure(cfg, u, wn, mesh));
    }
    return ms;
}

/// Radiation quantities r (d_r v - i kappa v) for v in {u, Delta u}, sampled by
/// central differences of the representation along a few fixed directions.
struct RadiationSample {
    double r;
    double u_quantity;
    double lap_quantity;
};

inline std::vector<RadiationSample> radiation_check(const MediumConfig& cfg, const ScalarFieldC& u,
                                                    const WaveNumber& wn,
                                                    const std::vector<double>& radii) {
    static const std::vector<Vec3> dirs = {
        Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(-1, 0, 0),
        Vec3(0.5, -0.5, std::sqrt(0.5)), Vec3(-0.3, 0.6, -std::sqrt(1 - 0.45))};
    std::vector<RadiationSample> out;
    for (double r : radii) {
        const double dr = 1e-3 * r;
        std::vector<Vec3> pts;
        for (const auto& d : dirs) {
            const Vec3 dd = d.normalized();
            pts.push_back((r + dr) * dd);
            pts.push_back((r - dr) * dd);
            pts.push_back(r * dd);
        }
        const BoundaryTrace tr = eval_representation(cfg, u, wn, pts);
        RadiationSample s{r, 0.0, 0.0};
        for (size_t d = 0; d < dirs.size(); ++d) {
            const Complex du = (tr.u[3 * d] - tr.u[3 * d + 1]) / (2.0 * dr);
            const Complex dl = (tr.lap_u[3 * d] - tr.lap_u[3 * d + 1]) / (2.0 * dr);
            s.u_quantity = std::max(s.u_quantity, std::abs(r * (du - kImag * wn.kappa * tr.u[3 * d + 2])));
            s.lap_quantity =
                std::max(s.lap_quantity, std::abs(r * (dl - kImag * wn.kappa * tr.lap_u[3 * d + 2])));
        }
        out.push_back(s);
    }
    return out;
}

} // namespace plateinv
