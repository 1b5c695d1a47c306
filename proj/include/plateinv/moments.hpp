#pragma once

#include <map>
#include <string>
#include <vector>

#include "plateinv/asymptotics.hpp"
#include "plateinv/quadrature.hpp"

namespace plateinv {

enum class MomentTarget { rho_f, rho_g };

inline const char* to_string(MomentTarget t) { return t == MomentTarget::rho_f ? "rho_f" : "rho_g"; }

/// Harmonic moments of a product field q in {rho f, rho g}:
/// entry(m, n) = integral of q(y) |y|^m conj(Y_m^n)(y/|y|) dy.
struct MomentTable {
    MomentTarget target = MomentTarget::rho_g;
    int m_max = 0;
    double R = 0.0; // measurement radius the table was extracted at (0 for oracle tables)
    std::vector<Complex> entries;

    Complex at(int m, int n) const {
        if (m < 0 || m > m_max || n < -m || n > m) throw input_error("MomentTable::at: index out of range");
        return entries[static_cast<size_t>(sh_flat(m, n))];
    }

    double scale() const {
        double s = 0;
        for (const auto& e : entries) s = std::max(s, std::abs(e));
        return s;
    }
};

/// Ground-truth table by direct volume quadrature.
inline MomentTable oracle_moment_table(const ScalarFieldR& q, MomentTarget target, int m_max) {
    MomentTable t;
    t.target = target;
    t.m_max = m_max;
    t.entries.resize(static_cast<size_t>(sh_count(m_max)));
    ScalarFieldC qc(q.grid);
    for (int i = 0; i < q.size(); ++i) qc[i] = Complex(q[i], 0.0);
    for (int m = 0; m <= m_max; ++m)
        for (int n = -m; n <= m; ++n)
            t.entries[static_cast<size_t>(sh_flat(m, n))] = harmonic_moment_oracle(qc, SHIndex(m, n));
    return t;
}

/// Moments from boundary data: the kappa^0 coefficient of Delta u carries the
/// g_0 potential of rho*g and the kappa^2 coefficient the one of rho*f; the
/// multipole series of g_0 turns spherical-harmonic projections on the
/// measurement sphere into volume moments.
inline MomentTable extract_moments(const ExpansionTable& table, const SphereMesh& mesh,
                                   MomentTarget target, int m_max) {
    namespace ec = expansion_constants;
    if (table.node_count() != mesh.node_count())
        throw input_error("extract_moments: table and mesh node counts differ");
    if (m_max > mesh.exact_projection_degree())
        throw input_error("extract_moments: m_max exceeds the mesh's exact-projection degree");

    const auto& field = (target == MomentTarget::rho_g) ? table.N0 : table.N2;
    const auto proj = mesh.project(field, m_max);

    MomentTable t;
    t.target = target;
    t.m_max = m_max;
    t.R = mesh.radius;
    t.entries.resize(static_cast<size_t>(sh_count(m_max)));
    for (int m = 0; m <= m_max; ++m) {
        const Complex factor = (target == MomentTarget::rho_g) ? ec::moment_factor_rho_g(m, mesh.radius)
                                                               : ec::moment_factor_rho_f(m, mesh.radius);
        for (int n = -m; n <= m; ++n) {
            const int k = sh_flat(m, n);
            t.entries[static_cast<size_t>(k)] = factor * proj[static_cast<size_t>(k)];
        }
    }
    return t;
}

/// Total mass of the product field from the degree-0 entry.
inline Complex mass_from_table(const MomentTable& mt) {
    return std::sqrt(4.0 * kPi) * mt.at(0, 0);
}

/// First moment vector (integral of y q dy) from the degree-1 entries.
inline Eigen::Vector3cd first_moment_from_table(const MomentTable& mt) {
    const double c = std::sqrt(2.0 * kPi / 3.0);
    Eigen::Vector3cd s1;
    s1(0) = c * (mt.at(1, -1) - mt.at(1, 1));
    s1(1) = -kImag * c * (mt.at(1, 1) + mt.at(1, -1));
    s1(2) = std::sqrt(4.0 * kPi / 3.0) * mt.at(1, 0);
    return s1;
}

// ---------------------------------------------------------------------------
// harmonic test functionals
// ---------------------------------------------------------------------------

/// A harmonic function used to probe the moment data. The polynomial case is
/// the solid harmonic |y|^m conj(Y_m^n), so its functional equals the (m, n)
/// table entry exactly. The exponential case is h(x) = e^{i xi.x} with a
/// complex frequency satisfying xi.xi = 0.
struct HarmonicTest {
    enum class Kind { polynomial, exponential };
    Kind kind = Kind::polynomial;
    SHIndex index;
    Eigen::Vector3cd xi = Eigen::Vector3cd::Zero();

    static HarmonicTest solid(int m, int n) {
        HarmonicTest h;
        h.kind = Kind::polynomial;
        h.index = SHIndex(m, n);
        return h;
    }

    static HarmonicTest exponential(const Vec3& xi_re, const Vec3& xi_im) {
        HarmonicTest h;
        h.kind = Kind::exponential;
        for (int a = 0; a < 3; ++a) h.xi(a) = Complex(xi_re[a], xi_im[a]);
        const Complex hsq = h.xi(0) * h.xi(0) + h.xi(1) * h.xi(1) + h.xi(2) * h.xi(2);
        const double scale = h.xi.squaredNorm(); // sum |xi_j|^2
        if (std::abs(hsq) > 1e-12 * std::max(scale, 1e-30))
            throw input_error("HarmonicTest: exponential frequency is not harmonic (xi.xi != 0)");
        return h;
    }
};

/// Tail bound of the solid-harmonic expansion of e^{i xi.x} truncated at
/// degree m, over a support ball of the given radius.
inline double exponential_tail_bound(double xi_norm, double support_radius, int m) {
    double t = 1.0;
    for (int j = 1; j <= m + 1; ++j) t *= xi_norm * support_radius / j;
    return t;
}

/// Reconstruct the volume functional integral q h dy from the moment table.
inline Complex eval_harmonic_functional(const MomentTable& mt, const HarmonicTest& h,
                                        double support_radius, double tail_tol = 1e-6) {
    if (h.kind == HarmonicTest::Kind::polynomial) {
        if (h.index.m > mt.m_max)
            throw input_error("eval_harmonic_functional: polynomial degree beyond the table");
        return mt.at(h.index.m, h.index.n);
    }

    const double xi_norm = std::sqrt(h.xi.squaredNorm());
    if (exponential_tail_bound(xi_norm, support_radius, mt.m_max) > tail_tol) {
        int need = mt.m_max;
        while (need < 1000 && exponential_tail_bound(xi_norm, support_radius, need) > tail_tol) ++need;
        throw truncation_error("eval_harmonic_functional: truncation tail above tolerance", need);
    }

    // Taylor terms (i xi.x)^m / m! are homogeneous harmonic polynomials; project
    // each onto the harmonics with a quadrature exact through degree 2 m_max.
    const int m_max = mt.m_max;
    const auto mesh = make_sphere_mesh(1.0, m_max + 1, 2 * m_max + 2);
    std::vector<Complex> dots(mesh.nodes.size());
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Vec3& d = mesh.nodes[i];
        dots[i] = h.xi(0) * d.x() + h.xi(1) * d.y() + h.xi(2) * d.z();
    }
    Complex acc{0, 0};
    std::vector<Complex> pw(mesh.nodes.size(), Complex{1, 0});
    double mfact = 1.0;
    for (int m = 0; m <= m_max; ++m) {
        if (m > 0) {
            for (size_t i = 0; i < pw.size(); ++i) pw[i] *= dots[i];
            mfact *= m;
        }
        const auto proj = mesh.project(pw, m); // coefficients of (xi.x)^m over degrees <= m
        for (int n = -m; n <= m; ++n) {
            const Complex a_mn = ipow(m) / mfact * proj[static_cast<size_t>(sh_flat(m, n))];
            // integral of q r^m Y_m^n = (-1)^n entry(m, -n)
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            acc += a_mn * sign * mt.at(m, -n);
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// ordering-based uniqueness diagnostics
// ---------------------------------------------------------------------------

enum class OrderingMode { product_g, density, monotone_perturbation };
enum class DeclaredOrdering { none, le, ge };

/// Numeric verdict comparing two moment tables under an a-priori pointwise
/// ordering hypothesis. Purely diagnostic.
struct OrderingReport {
    OrderingMode mode = OrderingMode::product_g;
    DeclaredOrdering declared = DeclaredOrdering::none;
    double max_entry_diff = 0.0;
    double table_scale = 0.0;
    Complex degree0_diff{0, 0};
    bool degree0_equal = false;
    bool tables_equal = false;
    bool contradiction = false;
    std::string conclusion;
};

inline OrderingReport check_ordering_uniqueness(const MomentTable& a, const MomentTable& b,
                                                OrderingMode mode,
                                                DeclaredOrdering declared = DeclaredOrdering::none,
                                                double tol = 1e-8) {
    if (a.m_max != b.m_max) throw input_error("check_ordering_uniqueness: tables truncate differently");
    OrderingReport r;
    r.mode = mode;
    r.declared = declared;
    r.table_scale = std::max(a.scale(), b.scale());
    for (size_t k = 0; k < a.entries.size(); ++k)
        r.max_entry_diff = std::max(r.max_entry_diff, std::abs(a.entries[k] - b.entries[k]));
    r.degree0_diff = a.at(0, 0) - b.at(0, 0);
    const double floor = tol * std::max(r.table_scale, 1e-300);
    r.degree0_equal = std::abs(r.degree0_diff) <= floor;
    r.tables_equal = r.max_entry_diff <= floor;

    const bool ordered = declared != DeclaredOrdering::none;
    if (r.degree0_equal) {
        if (ordered) {
            switch (mode) {
                case OrderingMode::product_g:
                    r.conclusion = "ordered products with equal mass coincide a.e.";
                    break;
                case OrderingMode::density:
                    r.conclusion = "ordered densities with equal mass coincide; the g sources follow";
                    break;
                case OrderingMode::monotone_perturbation:
                    r.conclusion = "no nonnegative perturbation is compatible with the data";
                    break;
            }
        } else {
            r.conclusion = "degree-0 moments agree; no ordering declared";
        }
    } else {
        // the data forces equal masses, so a nonzero difference contradicts
        // the equal-measurement hypothesis
        r.contradiction = true;
        r.conclusion = "degree-0 moments differ: equal-measurement hypothesis rejected";
    }
    return r;
}

} // namespace plateinv
