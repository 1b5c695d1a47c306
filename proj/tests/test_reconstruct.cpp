#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "plateinv/reconstruct.hpp"

using namespace plateinv;

namespace {

struct CylSetup {
    GridPtr grid;
    Mask omega;
    DomainSpec dom;
    double zh;
};

CylSetup cylinder_setup(int n = 12, double radius = 0.45, double R = 1.5) {
    const double zh = (n % 3 == 0) ? 1.0 / 3.0 : 0.375;
    auto grid = make_grid(n, Vec3(-1, -1, -1), Vec3(1, 1, 1));
    Mask omega = cylinder_mask(grid, 0.0, 0.0, radius, -zh, zh);
    return CylSetup{grid, omega, DomainSpec(grid, omega, R), zh};
}

MediumConfig invariant_config(const CylSetup& s, Profile fp, Profile gp, Profile rhop) {
    fp.invariant = true;
    gp.invariant = true;
    rhop.invariant = true;
    return MediumConfig(s.dom, density_field(s.grid, s.omega, rhop), masked_field(s.grid, s.omega, fp),
                        masked_field(s.grid, s.omega, gp), Vec3(0, 0, 1));
}

} // namespace

TEST_CASE("invariant cross-section plumbing") {
    auto s = cylinder_setup();
    const auto cs = invariant_cross_section(s.dom);
    REQUIRE(cs.count() > 0);
    // every column has the same number of z voxels for a cylinder
    const size_t depth = cs.column_voxels.front().size();
    for (const auto& col : cs.column_voxels) REQUIRE(col.size() == depth);
}

TEST_CASE("constant profile is recovered from its moments") {
    auto s = cylinder_setup();
    auto cfg = invariant_config(s, Profile::constant(0.0), Profile::constant(2.0), Profile::constant(1.0));
    const auto mt = oracle_moment_table(cfg.rho_g_product(), MomentTarget::rho_g, 8);
    const auto rec = reconstruct_invariant_product(mt, s.dom, 1e-8);
    REQUIRE(profile_rel_l2_error(rec, cfg.rho_g_product()) <= 1e-3);
    REQUIRE(rec.imag_fraction <= 1e-10);

    // replicated field reproduces the product on Omega
    const auto field = profile_to_field(rec, s.dom);
    for (int i = 0; i < field.size(); ++i)
        if (s.omega[static_cast<size_t>(i)])
            REQUIRE(field[i] == Catch::Approx(2.0).epsilon(5e-3));
}

TEST_CASE("off-center bump closed over oracle moments") {
    auto s = cylinder_setup(16);
    auto cfg = invariant_config(s, Profile::constant(0.0),
                                Profile::gaussian(1.0, Vec3(0.15, -0.1, 0), 0.16),
                                Profile::constant(1.0));
    const auto mt = oracle_moment_table(cfg.rho_g_product(), MomentTarget::rho_g, 12);
    const auto rec = reconstruct_invariant_product(mt, s.dom, 1e-8);
    REQUIRE(profile_rel_l2_error(rec, cfg.rho_g_product()) <= 5e-2);
}

TEST_CASE("zero moments give the zero profile") {
    auto s = cylinder_setup();
    MomentTable zero;
    zero.target = MomentTarget::rho_g;
    zero.m_max = 8;
    zero.entries.assign(static_cast<size_t>(sh_count(8)), Complex{0, 0});
    const auto rec = reconstruct_invariant_product(zero, s.dom, 1e-8);
    for (double v : rec.values) REQUIRE(std::abs(v) <= 1e-12);
}

TEST_CASE("rank deficiency with floored ridge is refused") {
    auto s = cylinder_setup(16);
    auto cfg = invariant_config(s, Profile::constant(0.0), Profile::constant(1.0), Profile::constant(1.0));
    const auto mt = oracle_moment_table(cfg.rho_g_product(), MomentTarget::rho_g, 4); // 25 rows < pixels
    try {
        reconstruct_invariant_product(mt, s.dom, 1e-16);
        FAIL("expected conditioning_error");
    } catch (const conditioning_error& e) {
        REQUIRE(e.effective_rank > 0);
        REQUIRE(e.effective_rank < invariant_cross_section(s.dom).count());
    }
}

TEST_CASE("shifted second moment expands into monomial moments") {
    auto grid = make_grid(12, Vec3(-1, -1, -1), Vec3(1, 1, 1));
    Mask omega = ball_mask(grid, Vec3::Zero(), 0.5);
    const auto q = masked_field(grid, omega, Profile::gaussian(1.3, Vec3(0.12, -0.07, 0.05), 0.16));
    const auto mm = monomial_moments(q);
    const double vol = grid->voxel_volume();
    for (const Vec3& x : {Vec3(1.5, 0, 0), Vec3(0.3, -1.2, 0.8), Vec3(0, 0, 2.0)}) {
        double direct = 0.0;
        for (int i = 0; i < q.size(); ++i) {
            if (q[i] == 0.0) continue;
            direct += q[i] * (x - grid->center(i)).squaredNorm();
        }
        direct *= vol;
        REQUIRE(std::abs(shifted_second_moment(mm, x) - direct) <= 1e-10 * std::abs(direct));
    }
}

TEST_CASE("constant density recovery") {
    auto s = cylinder_setup();
    const auto mesh = make_sphere_mesh(1.5, 10, 20);

    auto run = [&](double rho_value) {
        auto cfg = invariant_config(s, Profile::gaussian(0.6, Vec3(0.1, 0.05, 0), 0.18),
                                    Profile::gaussian(1.0, Vec3(-0.08, 0.1, 0), 0.2),
                                    Profile::constant(rho_value));
        const auto table = analytic_expansion(cfg, mesh);
        return recover_constant_density(table, mesh, cfg.rho_f_product(), cfg.rho_g_product(), s.dom);
    };

    SECTION("exact in the noiseless-coefficient limit") {
        for (double rho : {0.5, 1.0, 2.0}) {
            const auto rec = run(rho);
            REQUIRE(std::abs(rec.rho - rho) <= 1e-8 * rho);
            REQUIRE(rec.rel_residual <= 1e-8);
        }
    }

    SECTION("sources divide back out") {
        auto cfg = invariant_config(s, Profile::gaussian(0.6, Vec3(0.1, 0.05, 0), 0.18),
                                    Profile::gaussian(1.0, Vec3(-0.08, 0.1, 0), 0.2),
                                    Profile::constant(2.0));
        const auto table = analytic_expansion(cfg, mesh);
        const auto rec =
            recover_constant_density(table, mesh, cfg.rho_f_product(), cfg.rho_g_product(), s.dom);
        double worst = 0;
        for (int i = 0; i < cfg.f.size(); ++i) {
            worst = std::max(worst, std::abs(rec.f[i] - cfg.f[i]));
            worst = std::max(worst, std::abs(rec.g[i] - cfg.g[i]));
        }
        REQUIRE(worst <= 1e-8);
    }

    SECTION("zero-mass g is refused") {
        // an odd g has zero total mass
        auto godd = ScalarFieldR(s.grid);
        for (int i = 0; i < godd.size(); ++i)
            if (s.omega[static_cast<size_t>(i)]) {
                const Vec3 x = s.grid->center(i);
                godd[i] = x.x() * std::exp(-(x.x() * x.x() + x.y() * x.y()) / 0.05);
            }
        MediumConfig cfg(s.dom, ScalarFieldR(s.grid, 1.0),
                         masked_field(s.grid, s.omega, Profile::constant(0.0)), godd);
        const auto table = analytic_expansion(cfg, mesh);
        REQUIRE_THROWS_AS(
            recover_constant_density(table, mesh, cfg.rho_f_product(), cfg.rho_g_product(), s.dom),
            illposed_error);
    }

    SECTION("nonpositive recovered density is a consistency error") {
        auto cfg = invariant_config(s, Profile::constant(0.0),
                                    Profile::gaussian(1.0, Vec3(0, 0, 0), 0.2), Profile::constant(1.2));
        auto table = analytic_expansion(cfg, mesh);
        // rewrite the payload so it encodes rho - 1 = -2
        const auto g_prod = cfg.rho_g_product();
        const double mass_g = integrate_volume(g_prod);
        const auto mm = monomial_moments(g_prod);
        const auto pot = detail::g0_potential(mesh, s.grid, s.dom.omega_voxels());
        for (int p = 0; p < table.node_count(); ++p) {
            const size_t q = static_cast<size_t>(p);
            const double quad = shifted_second_moment(mm, mesh.nodes[q]) / 6.0;
            const Complex w_target = -2.0 * mass_g * pot[q];
            table.N3[q] = (w_target - quad) / expansion_constants::eq3_payload;
        }
        REQUIRE_THROWS_AS(
            recover_constant_density(table, mesh, cfg.rho_f_product(), cfg.rho_g_product(), s.dom),
            consistency_error);
    }
}

TEST_CASE("inclusion contrast recovery") {
    // cylinder Omega with a smaller cylindrical inclusion
    auto grid = make_grid(12, Vec3(-1, -1, -1), Vec3(1, 1, 1));
    const double zh = 1.0 / 3.0;
    Mask omega = cylinder_mask(grid, 0.0, 0.0, 0.45, -zh, zh);
    Mask omega0 = cylinder_mask(grid, 0.12, -0.08, 0.2, -zh, zh);
    DomainSpec dom(grid, omega, 1.5, omega0);
    const auto mesh = make_sphere_mesh(1.5, 10, 20);

    auto build = [&](double varrho) {
        ScalarFieldR rho0(grid, 1.0); // invariant background
        ScalarFieldR rho(grid, 1.0);
        for (int i = 0; i < rho.size(); ++i)
            if (omega0[static_cast<size_t>(i)]) rho[i] = rho0[i] + varrho;
        auto f = masked_field(grid, omega, Profile::gaussian(0.5, Vec3(0.08, 0.05, 0), 0.18, true));
        auto g = masked_field(grid, omega, Profile::gaussian(1.0, Vec3(-0.06, 0.1, 0), 0.2, true));
        return std::make_pair(MediumConfig(dom, rho, f, g, Vec3(0, 0, 1)), rho0);
    };

    SECTION("zero contrast recovers zero") {
        auto [cfg, rho0] = build(0.0);
        const auto table = analytic_expansion(cfg, mesh);
        const auto rec = recover_inclusion_contrast(table, mesh, cfg.rho_f_product(),
                                                    cfg.rho_g_product(), rho0, dom);
        REQUIRE(std::abs(rec.varrho) <= 1e-10);
    }

    SECTION("half contrast is recovered") {
        auto [cfg, rho0] = build(0.5);
        const auto table = analytic_expansion(cfg, mesh);
        const auto rec = recover_inclusion_contrast(table, mesh, cfg.rho_f_product(),
                                                    cfg.rho_g_product(), rho0, dom);
        REQUIRE(std::abs(rec.varrho - 0.5) <= 1e-8);
        REQUIRE(rec.rel_residual <= 1e-8);
    }

    SECTION("different inclusion sets give different functionals") {
        Mask omega0b = cylinder_mask(grid, -0.15, 0.1, 0.15, -zh, zh);
        std::vector<int> va, vb;
        for (int i = 0; i < grid->count(); ++i) {
            if (omega0[static_cast<size_t>(i)]) va.push_back(i);
            if (omega0b[static_cast<size_t>(i)]) vb.push_back(i);
        }
        const auto pa = detail::g0_potential(mesh, grid, va);
        const auto pb = detail::g0_potential(mesh, grid, vb);
        double diff = 0, scale = 0;
        for (size_t p = 0; p < pa.size(); ++p) {
            diff = std::max(diff, std::abs(pa[p] - pb[p]));
            scale = std::max(scale, std::abs(pa[p]));
        }
        REQUIRE(diff > 1e-3 * scale);
    }

    SECTION("missing or empty inclusion is rejected") {
        auto [cfg, rho0] = build(0.5);
        const auto table = analytic_expansion(cfg, mesh);
        DomainSpec no_incl(grid, omega, 1.5);
        REQUIRE_THROWS_AS(recover_inclusion_contrast(table, mesh, cfg.rho_f_product(),
                                                     cfg.rho_g_product(), rho0, no_incl),
                          input_error);
    }
}
