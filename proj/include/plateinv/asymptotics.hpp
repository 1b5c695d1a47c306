#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <vector>

#include "plateinv/constants.hpp"
#include "plateinv/forward.hpp"

namespace plateinv {

/// Low-frequency expansion coefficients of u (powers -1..3) and Delta u
/// (powers 0..3) per mesh node. M_{-1} and N_1 are node-constant by structure;
/// they are stored replicated so fitted tables can report their spread.
struct ExpansionTable {
    enum class Provenance { analytic, fitted };
    Provenance provenance = Provenance::analytic;

    std::vector<Complex> Mm1, M0, M1, M2, M3;
    std::vector<Complex> N0, N1, N2, N3;

    struct Diagnostics {
        double residual_u = 0.0;   // worst per-node rms fit residual
        double residual_lap = 0.0;
        double cond_u = 0.0;
        double cond_lap = 0.0;
        bool dropped_kminus1 = false;
    } diag;

    int node_count() const { return static_cast<int>(N0.size()); }

    /// Relative node spread of a coefficient that must be constant.
    static double constancy_spread(const std::vector<Complex>& c) {
        if (c.empty()) return 0.0;
        Complex mean{0, 0};
        for (const auto& v : c) mean += v;
        mean /= static_cast<double>(c.size());
        double dev = 0.0;
        for (const auto& v : c) dev = std::max(dev, std::abs(v - mean));
        return dev / std::max(std::abs(mean), 1e-300);
    }
};

namespace detail {

inline void require_off_support(const MediumConfig& cfg, const std::vector<Vec3>& points) {
    const auto support = cfg.support_voxels();
    const double clearance = cfg.rho.grid->half_diagonal();
    for (const auto& x : points)
        for (int j : support)
            if ((x - cfg.rho.grid->center(j)).norm() < clearance)
                throw geometry_error("expansion: evaluation point inside a source-support voxel");
}

} // namespace detail

/// Grid evaluation of the closed-form coefficients M_{-1}, M_0, M_1; these are
/// the recursion bases for the general-order formulas.
inline std::vector<ScalarFieldC> expansion_grid_fields(const MediumConfig& cfg, int up_to_m) {
    namespace ec = expansion_constants;
    if (up_to_m > 1) throw input_error("expansion_grid_fields: recursion bases available up to M_1 only");
    const auto omega = cfg.domain.omega_voxels();
    const auto& grid = *cfg.rho.grid;
    const double vol = grid.voxel_volume();

    double mass_f = 0.0, mass_g = 0.0;
    for (int j : omega) {
        mass_f += cfg.rho[j] * cfg.f[j];
        mass_g += cfg.rho[j] * cfg.g[j];
    }
    mass_f *= vol;
    mass_g *= vol;

    std::vector<ScalarFieldC> out;
    out.emplace_back(cfg.rho.grid, ec::M_minus1 * mass_g); // M_{-1}, constant
    if (up_to_m < 0) return out;

    ScalarFieldC m0(cfg.rho.grid);
    parallel_for(grid.count(), [&](int i) {
        const Vec3 x = grid.center(i);
        double acc = 0.0;
        for (int j : omega) {
            const double rg = cfg.rho[j] * cfg.g[j];
            if (rg == 0.0) continue;
            acc += rg * biharmonic_green_zero((x - grid.center(j)).norm());
        }
        m0[i] = ec::M0 * acc * vol;
    });
    out.push_back(std::move(m0));
    if (up_to_m < 1) return out;

    ScalarFieldC m1(cfg.rho.grid);
    parallel_for(grid.count(), [&](int i) {
        const Vec3 x = grid.center(i);
        double acc = 0.0;
        for (int j : omega) {
            const double rg = cfg.rho[j] * cfg.g[j];
            if (rg == 0.0) continue;
            acc += rg * (x - grid.center(j)).squaredNorm() / 6.0;
        }
        m1[i] = ec::M1_f * mass_f + ec::M1_g * acc * vol;
    });
    out.push_back(std::move(m1));
    return out;
}

/// Closed-form expansion coefficients at the mesh nodes, exactly as printed in
/// the low-frequency lemma.
inline ExpansionTable analytic_expansion(const MediumConfig& cfg, const SphereMesh& mesh) {
    namespace ec = expansion_constants;
    detail::require_off_support(cfg, mesh.nodes);

    const auto omega = cfg.domain.omega_voxels();
    const auto contrast = cfg.contrast_voxels();
    const auto& grid = *cfg.rho.grid;
    const double vol = grid.voxel_volume();
    const int nn = mesh.node_count();

    double mass_f = 0.0, mass_g = 0.0, contrast_total = 0.0;
    for (int j : omega) {
        mass_f += cfg.rho[j] * cfg.f[j];
        mass_g += cfg.rho[j] * cfg.g[j];
    }
    for (int j : contrast) contrast_total += cfg.rho[j] - 1.0;
    mass_f *= vol;
    mass_g *= vol;
    contrast_total *= vol;

    const Complex mm1 = ec::M_minus1 * mass_g;

    // M_0(y) on the contrast voxels, needed by the x-independent part of M_3
    Complex contrast_m0{0, 0};
    {
        const auto bases = expansion_grid_fields(cfg, 0);
        for (int j : contrast) contrast_m0 += (cfg.rho[j] - 1.0) * bases[1][j];
        contrast_m0 *= vol;
    }

    ExpansionTable t;
    t.provenance = ExpansionTable::Provenance::analytic;
    t.Mm1.assign(static_cast<size_t>(nn), mm1);
    t.M0.resize(static_cast<size_t>(nn));
    t.M1.resize(static_cast<size_t>(nn));
    t.M2.resize(static_cast<size_t>(nn));
    t.M3.resize(static_cast<size_t>(nn));
    t.N0.resize(static_cast<size_t>(nn));
    t.N1.assign(static_cast<size_t>(nn), ec::N1 * mass_g);
    t.N2.resize(static_cast<size_t>(nn));
    t.N3.resize(static_cast<size_t>(nn));

    parallel_for(nn, [&](int p) {
        const Vec3 x = mesh.nodes[static_cast<size_t>(p)];
        double g_G0 = 0.0, g_r2 = 0.0, g_r4 = 0.0, g_g0 = 0.0;
        double f_G0 = 0.0, f_r2 = 0.0, f_g0 = 0.0;
        for (int j : omega) {
            const double rg = cfg.rho[j] * cfg.g[j];
            const double rf = cfg.rho[j] * cfg.f[j];
            if (rg == 0.0 && rf == 0.0) continue;
            const double r = (x - grid.center(j)).norm();
            const double r2 = r * r;
            if (rg != 0.0) {
                g_G0 += rg * biharmonic_green_zero(r);
                g_r2 += rg * r2 / 6.0;
                g_r4 += rg * r2 * r2 / 120.0;
                g_g0 += rg * laplace_green(r);
            }
            if (rf != 0.0) {
                f_G0 += rf * biharmonic_green_zero(r);
                f_r2 += rf * r2 / 6.0;
                f_g0 += rf * laplace_green(r);
            }
        }
        double c_G0 = 0.0, c_g0 = 0.0;
        for (int j : contrast) {
            const double r = (x - grid.center(j)).norm();
            c_G0 += (cfg.rho[j] - 1.0) * biharmonic_green_zero(r);
            c_g0 += (cfg.rho[j] - 1.0) * laplace_green(r);
        }
        g_G0 *= vol; g_r2 *= vol; g_r4 *= vol; g_g0 *= vol;
        f_G0 *= vol; f_r2 *= vol; f_g0 *= vol;
        c_G0 *= vol; c_g0 *= vol;

        t.M0[static_cast<size_t>(p)] = ec::M0 * g_G0;
        t.M1[static_cast<size_t>(p)] = ec::M1_f * mass_f + ec::M1_g * g_r2;
        t.M2[static_cast<size_t>(p)] = ec::M2_contrast * mm1 * contrast_total + ec::M2_f * f_G0;
        t.M3[static_cast<size_t>(p)] = ec::M3_contrast_G0 * mm1 * c_G0 + ec::M3_contrast_M0 * contrast_m0 +
                                       ec::M3_f * f_r2 + ec::M3_g * g_r4;
        t.N0[static_cast<size_t>(p)] = ec::N0 * g_g0;
        t.N2[static_cast<size_t>(p)] = ec::N2 * f_g0;
        t.N3[static_cast<size_t>(p)] = ec::N3_contrast * mm1 * c_g0 + ec::N3_f * mass_f + ec::N3_g * g_r2;
    });
    return t;
}

/// General-order coefficients from the recursion stated after the expansion
/// lemma, implemented term by term as printed. Returns (M_{n+2}, N_{n+3}) at
/// the mesh nodes. Bases are available through M_1, so n <= 2.
inline std::pair<std::vector<Complex>, std::vector<Complex>>
general_order_coeff(const MediumConfig& cfg, const SphereMesh& mesh, int n) {
    if (n < 0) throw input_error("general_order_coeff: n must be nonnegative");
    if (n > 2) throw input_error("general_order_coeff: recursion base missing beyond M_1 (n <= 2)");
    detail::require_off_support(cfg, mesh.nodes);

    const auto bases = expansion_grid_fields(cfg, std::min(n - 1, 1)); // M_{-1} .. M_{n-1}
    auto base_at = [&](int m) -> const ScalarFieldC& {
        return bases[static_cast<size_t>(m + 1)];
    };

    const auto omega = cfg.domain.omega_voxels();
    const auto contrast = cfg.contrast_voxels();
    const auto& grid = *cfg.rho.grid;
    const double vol = grid.voxel_volume();
    const double pi8 = 8.0 * kPi;
    auto bracket = [&](int j) { // (i^j - (-1)^j) / (8 pi)
        const Complex neg = (j % 2 == 0) ? Complex{1, 0} : Complex{-1, 0};
        return (ipow(j) - neg) / pi8;
    };

    std::vector<Complex> mfield(static_cast<size_t>(mesh.node_count()));
    std::vector<Complex> nfield(static_cast<size_t>(mesh.node_count()));
    parallel_for(mesh.node_count(), [&](int p) {
        const Vec3 x = mesh.nodes[static_cast<size_t>(p)];
        Complex macc{0, 0}, nacc{0, 0};
        // contrast sums over m
        for (int m = 0; m <= n; ++m) {
            const Complex bm = bracket(m + 1) / factorial(m + 1);
            Complex acc{0, 0};
            for (int j : contrast) {
                const double r = (x - grid.center(j)).norm();
                acc += (cfg.rho[j] - 1.0) * base_at(n - m - 1)[j] * std::pow(r, m);
            }
            macc += bm * acc * vol;
        }
        for (int m = 1; m <= n + 1; ++m) {
            const Complex bm = bracket(m + 1) / factorial(m - 1);
            Complex acc{0, 0};
            for (int j : contrast) {
                const double r = (x - grid.center(j)).norm();
                acc += (cfg.rho[j] - 1.0) * base_at(n - m)[j] * std::pow(r, m - 2);
            }
            nacc += bm * acc * vol;
        }
        // source terms
        Complex mf{0, 0}, mg{0, 0}, nf{0, 0}, ng{0, 0};
        for (int j : omega) {
            const double rf = cfg.rho[j] * cfg.f[j];
            const double rg = cfg.rho[j] * cfg.g[j];
            if (rf == 0.0 && rg == 0.0) continue;
            const double r = (x - grid.center(j)).norm();
            if (rf != 0.0) {
                mf += rf * std::pow(r, n + 1);
                nf += rf * std::pow(r, n);
            }
            if (rg != 0.0) {
                mg += rg * std::pow(r, n + 3);
                ng += rg * std::pow(r, n + 2);
            }
        }
        const Complex inv2pi_i = -kImag / (2.0 * kPi);
        macc += inv2pi_i * bracket(n + 2) / factorial(n + 2) * mf * vol;
        macc += (1.0 / (2.0 * kPi)) * bracket(n + 4) / factorial(n + 4) * mg * vol;
        nacc += inv2pi_i * bracket(n + 3) / factorial(n + 1) * nf * vol;
        nacc += (1.0 / (2.0 * kPi)) * bracket(n + 5) / factorial(n + 3) * ng * vol;
        mfield[static_cast<size_t>(p)] = macc;
        nfield[static_cast<size_t>(p)] = nacc;
    });
    return {std::move(mfield), std::move(nfield)};
}

// ---------------------------------------------------------------------------
// fitting coefficients from measured sweeps
// ---------------------------------------------------------------------------

struct FitOptions {
    std::vector<int> powers_u = {-1, 0, 1, 2, 3};
    std::vector<int> powers_lap = {0, 1, 2, 3};
    /// Extra highest-order columns appended to both families to absorb the
    /// O(kappa^4) remainder; fitted guard coefficients are discarded. Without
    /// them the kappa^3 coefficients soak up the remainder instead.
    int guard_powers = 2;
    double drop_threshold = 1e-10; // relative floor below which kappa^{-1} is dropped
    double max_condition = 1e12;
};

namespace detail {

struct NodeFit {
    std::vector<Eigen::VectorXcd> coeffs; // per node
    double worst_residual = 0.0;
    double condition = 0.0;
};

inline NodeFit fit_family(const MeasurementSet& ms, const std::vector<int>& powers, bool lap_family,
                          double weight_exponent, double max_condition) {
    const int nk = static_cast<int>(ms.kappas.size());
    const int np = static_cast<int>(powers.size());
    Eigen::MatrixXcd a(nk, np);
    Eigen::VectorXd w(nk);
    for (int r = 0; r < nk; ++r) {
        w(r) = std::pow(ms.kappas[static_cast<size_t>(r)], weight_exponent);
        for (int c = 0; c < np; ++c)
            a(r, c) = std::pow(ms.kappas[static_cast<size_t>(r)], powers[static_cast<size_t>(c)]) * w(r);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(np - 1);
    if (!(cond < max_condition))
        throw conditioning_error("fit_expansion: kappa grid too clustered for the requested powers", cond);

    NodeFit fit;
    fit.condition = cond;
    const int nn = ms.mesh.node_count();
    fit.coeffs.resize(static_cast<size_t>(nn));
    for (int p = 0; p < nn; ++p) {
        Eigen::VectorXcd rhs(nk);
        for (int r = 0; r < nk; ++r) {
            const auto& tr = ms.traces[static_cast<size_t>(r)];
            rhs(r) = (lap_family ? tr.lap_u[static_cast<size_t>(p)] : tr.u[static_cast<size_t>(p)]) * w(r);
        }
        Eigen::VectorXcd c = svd.solve(rhs);
        const double resid = (a * c - rhs).norm() / std::sqrt(static_cast<double>(nk));
        fit.worst_residual = std::max(fit.worst_residual, resid);
        fit.coeffs[static_cast<size_t>(p)] = std::move(c);
    }
    return fit;
}

} // namespace detail

/// Per-node weighted least squares of the traces over the monomials kappa^m.
/// The u family is weighted by kappa to balance the kappa^{-1} column; when the
/// data has no kappa^{-1} content the column is dropped and refit.
inline ExpansionTable fit_expansion(const MeasurementSet& ms, const FitOptions& opt = {}) {
    const size_t need = 2 + std::max(opt.powers_u.size(), opt.powers_lap.size());
    if (ms.kappas.size() < need)
        throw input_error("fit_expansion: not enough distinct kappa samples for the requested powers");

    std::vector<int> powers_u = opt.powers_u;
    std::vector<int> powers_lap = opt.powers_lap;
    for (int e = 0; e < opt.guard_powers; ++e) {
        const int pu = *std::max_element(opt.powers_u.begin(), opt.powers_u.end()) + 1 + e;
        const int pl = *std::max_element(opt.powers_lap.begin(), opt.powers_lap.end()) + 1 + e;
        powers_u.push_back(pu);
        powers_lap.push_back(pl);
    }
    // guards must still leave the system overdetermined
    while (powers_u.size() >= ms.kappas.size()) powers_u.pop_back();
    while (powers_lap.size() >= ms.kappas.size()) powers_lap.pop_back();

    auto ufit = detail::fit_family(ms, powers_u, false, 1.0, opt.max_condition);
    const auto lfit = detail::fit_family(ms, powers_lap, true, 0.0, opt.max_condition);

    // degenerate g: kappa^{-1} coefficient below the data floor -> refit without it
    bool dropped = false;
    const auto it_m1 = std::find(powers_u.begin(), powers_u.end(), -1);
    if (it_m1 != powers_u.end()) {
        double cmax = 0.0, data_scale = 0.0;
        const int idx = static_cast<int>(it_m1 - powers_u.begin());
        for (const auto& c : ufit.coeffs) cmax = std::max(cmax, std::abs(c(idx)));
        for (const auto& tr : ms.traces)
            for (const auto& v : tr.u) data_scale = std::max(data_scale, std::abs(v));
        if (cmax < opt.drop_threshold * data_scale) {
            powers_u.erase(std::find(powers_u.begin(), powers_u.end(), -1));
            ufit = detail::fit_family(ms, powers_u, false, 1.0, opt.max_condition);
            dropped = true;
        }
    }

    const int nn = ms.mesh.node_count();
    ExpansionTable t;
    t.provenance = ExpansionTable::Provenance::fitted;
    t.diag.residual_u = ufit.worst_residual;
    t.diag.residual_lap = lfit.worst_residual;
    t.diag.cond_u = ufit.condition;
    t.diag.cond_lap = lfit.condition;
    t.diag.dropped_kminus1 = dropped;

    auto pick = [](const std::vector<int>& powers, const Eigen::VectorXcd& c, int power) {
        const auto it = std::find(powers.begin(), powers.end(), power);
        if (it == powers.end()) return Complex{0, 0};
        return Complex(c(static_cast<int>(it - powers.begin())));
    };
    t.Mm1.resize(static_cast<size_t>(nn));
    t.M0.resize(static_cast<size_t>(nn));
    t.M1.resize(static_cast<size_t>(nn));
    t.M2.resize(static_cast<size_t>(nn));
    t.M3.resize(static_cast<size_t>(nn));
    t.N0.resize(static_cast<size_t>(nn));
    t.N1.resize(static_cast<size_t>(nn));
    t.N2.resize(static_cast<size_t>(nn));
    t.N3.resize(static_cast<size_t>(nn));
    for (int p = 0; p < nn; ++p) {
        const auto& cu = ufit.coeffs[static_cast<size_t>(p)];
        const auto& cl = lfit.coeffs[static_cast<size_t>(p)];
        t.Mm1[static_cast<size_t>(p)] = pick(powers_u, cu, -1);
        t.M0[static_cast<size_t>(p)] = pick(powers_u, cu, 0);
        t.M1[static_cast<size_t>(p)] = pick(powers_u, cu, 1);
        t.M2[static_cast<size_t>(p)] = pick(powers_u, cu, 2);
        t.M3[static_cast<size_t>(p)] = pick(powers_u, cu, 3);
        t.N0[static_cast<size_t>(p)] = pick(powers_lap, cl, 0);
        t.N1[static_cast<size_t>(p)] = pick(powers_lap, cl, 1);
        t.N2[static_cast<size_t>(p)] = pick(powers_lap, cl, 2);
        t.N3[static_cast<size_t>(p)] = pick(powers_lap, cl, 3);
    }
    return t;
}

/// u-expansion evaluated at one kappa from a table (degree 3).
inline std::vector<Complex> expansion_value_u(const ExpansionTable& t, double kappa) {
    std::vector<Complex> out(static_cast<size_t>(t.node_count()));
    for (int p = 0; p < t.node_count(); ++p) {
        const size_t i = static_cast<size_t>(p);
        out[i] = t.Mm1[i] / kappa + t.M0[i] + t.M1[i] * kappa + t.M2[i] * kappa * kappa +
                 t.M3[i] * kappa * kappa * kappa;
    }
    return out;
}

inline std::vector<Complex> expansion_value_lap(const ExpansionTable& t, double kappa) {
    std::vector<Complex> out(static_cast<size_t>(t.node_count()));
    for (int p = 0; p < t.node_count(); ++p) {
        const size_t i = static_cast<size_t>(p);
        out[i] = t.N0[i] + t.N1[i] * kappa + t.N2[i] * kappa * kappa + t.N3[i] * kappa * kappa * kappa;
    }
    return out;
}

/// Log-log slope of err(kappa) by least squares; used for the order checks.
inline double fitted_slope(const std::vector<double>& kappas, const std::vector<double>& errs) {
    const int n = static_cast<int>(kappas.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(kappas[static_cast<size_t>(i)]);
        const double y = std::log(std::max(errs[static_cast<size_t>(i)], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace plateinv
