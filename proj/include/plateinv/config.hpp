#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "plateinv/exterior.hpp"
#include "plateinv/medium.hpp"
#include "plateinv/reconstruct.hpp"

namespace plateinv {

using Json = nlohmann::json;

namespace cfgdetail {

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw input_error("config: unknown key '" + key + "' in " + where);
}

inline Vec3 parse_vec3(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw input_error("config: " + where + " must be a 3-vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Profile parse_profile(const Json& j, const std::string& where, bool invariant) {
    reject_unknown_keys(
        j, {"profile", "value", "amplitude", "center", "sigma", "radius", "halfwidth", "support_radius"},
        where);
    if (!j.contains("profile")) throw input_error("config: " + where + " needs a 'profile' name");
    const std::string kind = j["profile"].get<std::string>();
    Profile p;
    p.invariant = invariant;
    if (kind == "constant") {
        p.kind = Profile::Kind::constant;
        p.amplitude = j.value("value", 1.0);
    } else if (kind == "gaussian") {
        p.kind = Profile::Kind::gaussian;
        p.amplitude = j.value("amplitude", 1.0);
        if (j.contains("center")) p.center = parse_vec3(j["center"], where + ".center");
        p.sigma = j.value("sigma", 0.25);
        if (!(p.sigma > 0)) throw input_error("config: " + where + ".sigma must be positive");
        p.support_radius = j.value("support_radius", 0.0);
        if (p.support_radius < 0) throw input_error("config: " + where + ".support_radius must be nonnegative");
    } else if (kind == "ball") {
        p.kind = Profile::Kind::ball;
        p.amplitude = j.value("amplitude", 1.0);
        if (j.contains("center")) p.center = parse_vec3(j["center"], where + ".center");
        p.radius = j.value("radius", 0.5);
        if (!(p.radius > 0)) throw input_error("config: " + where + ".radius must be positive");
    } else if (kind == "box") {
        p.kind = Profile::Kind::box;
        p.amplitude = j.value("amplitude", 1.0);
        if (j.contains("center")) p.center = parse_vec3(j["center"], where + ".center");
        if (j.contains("halfwidth")) p.halfwidth = parse_vec3(j["halfwidth"], where + ".halfwidth");
    } else {
        throw input_error("config: " + where + " has unknown profile '" + kind + "'");
    }
    return p;
}

inline Mask parse_region(const Json& j, const GridPtr& grid, const std::string& where) {
    reject_unknown_keys(j, {"shape", "center", "radius", "lo", "hi", "z"}, where);
    if (!j.contains("shape")) throw input_error("config: " + where + " needs a 'shape'");
    const std::string shape = j["shape"].get<std::string>();
    if (shape == "ball") {
        const Vec3 c = j.contains("center") ? parse_vec3(j["center"], where) : Vec3::Zero();
        const double r = j.value("radius", 0.5);
        if (!(r > 0)) throw input_error("config: " + where + ".radius must be positive");
        return ball_mask(grid, c, r);
    }
    if (shape == "box") {
        return box_mask(grid, parse_vec3(j.at("lo"), where + ".lo"), parse_vec3(j.at("hi"), where + ".hi"));
    }
    if (shape == "cylinder") {
        if (!j.contains("z") || !j["z"].is_array() || j["z"].size() != 2)
            throw input_error("config: " + where + ".z must be [z_lo, z_hi]");
        double cx = 0, cy = 0;
        if (j.contains("center")) {
            if (!j["center"].is_array() || j["center"].size() != 2)
                throw input_error("config: " + where + ".center must be a 2-vector for a cylinder");
            cx = j["center"][0].get<double>();
            cy = j["center"][1].get<double>();
        }
        const double r = j.value("radius", 0.5);
        if (!(r > 0)) throw input_error("config: " + where + ".radius must be positive");
        return cylinder_mask(grid, cx, cy, r, j["z"][0].get<double>(), j["z"][1].get<double>());
    }
    throw input_error("config: " + where + " has unknown shape '" + shape + "'");
}

} // namespace cfgdetail

enum class Stage { forward, fit, extract, reconstruct, continuation };

inline const char* to_string(Stage s) {
    switch (s) {
        case Stage::forward: return "forward";
        case Stage::fit: return "fit";
        case Stage::extract: return "extract";
        case Stage::reconstruct: return "reconstruct";
        case Stage::continuation: return "continue";
    }
    return "?";
}

enum class DensityModel { none, constant, inclusion };

/// Fully validated run configuration; building one also constructs the medium,
/// so every physical constraint is enforced at load time.
struct RunConfig {
    Json raw;
    std::string hash;

    GridPtr grid;
    std::shared_ptr<MediumConfig> medium;
    bool invariant = false;

    std::vector<double> kappas;
    int mesh_n_theta = 14, mesh_n_phi = 28;
    int omega_mesh_n_theta = 16, omega_mesh_n_phi = 32;
    std::optional<double> omega_ball_radius; // required by the continuation stage

    std::vector<Stage> stages;
    int m_max = 8;
    double ridge = 1e-8;
    std::vector<MomentTarget> targets = {MomentTarget::rho_g, MomentTarget::rho_f};
    DensityModel density_model = DensityModel::none;
    double rho0_constant = 1.0;

    std::string output_dir = "out";

    SphereMesh measurement_mesh() const {
        return make_sphere_mesh(medium->domain.R, mesh_n_theta, mesh_n_phi);
    }
    SphereMesh omega_mesh() const {
        if (!omega_ball_radius)
            throw input_error("config: the continuation stage needs a ball-shaped Omega");
        return make_sphere_mesh(*omega_ball_radius, omega_mesh_n_theta, omega_mesh_n_phi);
    }
};

namespace cfgdetail {

inline std::string fnv1a_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace cfgdetail

inline RunConfig parse_run_config(const Json& j) {
    using namespace cfgdetail;
    RunConfig rc;
    rc.raw = j;
    rc.hash = fnv1a_hash(j.dump());

    reject_unknown_keys(j, {"geometry", "medium", "sweep", "pipeline", "inversion", "output_dir"},
                        "the top level");
    if (!j.contains("geometry") || !j.contains("medium"))
        throw input_error("config: 'geometry' and 'medium' blocks are required");

    // geometry
    const Json& jg = j["geometry"];
    reject_unknown_keys(jg, {"grid_n", "box_lo", "box_hi", "R", "omega", "omega0"}, "geometry");
    std::array<int, 3> n{12, 12, 12};
    if (jg.contains("grid_n")) {
        if (jg["grid_n"].is_number_integer()) {
            n.fill(jg["grid_n"].get<int>());
        } else if (jg["grid_n"].is_array() && jg["grid_n"].size() == 3) {
            for (int a = 0; a < 3; ++a) n[static_cast<size_t>(a)] = jg["grid_n"][static_cast<size_t>(a)].get<int>();
        } else {
            throw input_error("config: geometry.grid_n must be an integer or a 3-vector");
        }
    }
    const Vec3 lo = jg.contains("box_lo") ? parse_vec3(jg["box_lo"], "geometry.box_lo") : Vec3(-1, -1, -1);
    const Vec3 hi = jg.contains("box_hi") ? parse_vec3(jg["box_hi"], "geometry.box_hi") : Vec3(1, 1, 1);
    rc.grid = make_grid(n, lo, hi);
    if (!jg.contains("R")) throw input_error("config: geometry.R is required");
    const double R = jg["R"].get<double>();
    if (!(R > 0)) throw input_error("config: geometry.R must be positive");
    if (!jg.contains("omega")) throw input_error("config: geometry.omega is required");
    Mask omega = parse_region(jg["omega"], rc.grid, "geometry.omega");
    if (jg["omega"].value("shape", "") == "ball" &&
        (!jg["omega"].contains("center") || parse_vec3(jg["omega"]["center"], "c").norm() == 0.0))
        rc.omega_ball_radius = jg["omega"].value("radius", 0.5);
    std::optional<Mask> omega0;
    if (jg.contains("omega0")) omega0 = parse_region(jg["omega0"], rc.grid, "geometry.omega0");
    DomainSpec dom(rc.grid, std::move(omega), R, std::move(omega0));

    // medium
    const Json& jm = j["medium"];
    reject_unknown_keys(jm, {"rho", "f", "g", "invariant"}, "medium");
    rc.invariant = jm.value("invariant", false);
    if (!jm.contains("f") || !jm.contains("g")) throw input_error("config: medium.f and medium.g are required");
    const Profile fp = parse_profile(jm["f"], "medium.f", rc.invariant);
    const Profile gp = parse_profile(jm["g"], "medium.g", rc.invariant);

    ScalarFieldR rho(rc.grid, 1.0);
    if (jm.contains("rho")) {
        const Json& jr = jm["rho"];
        if (jr.contains("profile") && jr["profile"] == "inclusion") {
            reject_unknown_keys(jr, {"profile", "background", "contrast"}, "medium.rho");
            if (!dom.inclusion_mask)
                throw input_error("config: inclusion density needs geometry.omega0");
            const double bg = jr.value("background", 1.0);
            const double contrast = jr.value("contrast", 0.0);
            rc.rho0_constant = bg;
            for (int i = 0; i < rc.grid->count(); ++i) {
                if (dom.omega_mask[static_cast<size_t>(i)]) rho[i] = bg;
                if ((*dom.inclusion_mask)[static_cast<size_t>(i)]) rho[i] = bg + contrast;
            }
            rc.density_model = DensityModel::inclusion;
        } else {
            const Profile rp = parse_profile(jr, "medium.rho", rc.invariant);
            rho = density_field(rc.grid, dom.omega_mask, rp);
            if (rp.kind == Profile::Kind::constant) rc.rho0_constant = rp.amplitude;
        }
    }
    ScalarFieldR ffield = masked_field(rc.grid, dom.omega_mask, fp);
    ScalarFieldR gfield = masked_field(rc.grid, dom.omega_mask, gp);
    rc.medium = std::make_shared<MediumConfig>(
        std::move(dom), std::move(rho), std::move(ffield), std::move(gfield),
        rc.invariant ? std::optional<Vec3>(Vec3(0, 0, 1)) : std::nullopt);

    // sweep
    if (j.contains("sweep")) {
        const Json& js = j["sweep"];
        reject_unknown_keys(js, {"kappas", "kappa_min", "kappa_max", "count", "spacing", "mesh", "omega_mesh"},
                            "sweep");
        if (js.contains("kappas")) {
            for (const auto& v : js["kappas"]) rc.kappas.push_back(v.get<double>());
        } else {
            const double kmin = js.value("kappa_min", 0.02 / R * 1.5);
            const double kmax = js.value("kappa_max", 0.2 / R * 1.5);
            const int count = js.value("count", 10);
            const std::string spacing = js.value("spacing", "geometric");
            if (!(kmin > 0) || !(kmax > kmin) || count < 2)
                throw input_error("config: sweep range must satisfy 0 < kappa_min < kappa_max, count >= 2");
            for (int i = 0; i < count; ++i) {
                const double t = static_cast<double>(i) / (count - 1);
                rc.kappas.push_back(spacing == "linear" ? kmin + t * (kmax - kmin)
                                                        : kmin * std::pow(kmax / kmin, t));
            }
        }
        for (double k : rc.kappas)
            if (!(k > 0)) throw input_error("config: sweep wavenumbers must be positive");
        for (size_t i = 1; i < rc.kappas.size(); ++i)
            if (!(rc.kappas[i] > rc.kappas[i - 1]))
                throw input_error("config: sweep wavenumbers must be strictly increasing");
        if (js.contains("mesh")) {
            reject_unknown_keys(js["mesh"], {"n_theta", "n_phi"}, "sweep.mesh");
            rc.mesh_n_theta = js["mesh"].value("n_theta", rc.mesh_n_theta);
            rc.mesh_n_phi = js["mesh"].value("n_phi", rc.mesh_n_phi);
        }
        if (js.contains("omega_mesh")) {
            reject_unknown_keys(js["omega_mesh"], {"n_theta", "n_phi"}, "sweep.omega_mesh");
            rc.omega_mesh_n_theta = js["omega_mesh"].value("n_theta", rc.omega_mesh_n_theta);
            rc.omega_mesh_n_phi = js["omega_mesh"].value("n_phi", rc.omega_mesh_n_phi);
        }
    } else {
        for (int i = 0; i < 10; ++i)
            rc.kappas.push_back(0.02 / R * 1.5 * std::pow(10.0, static_cast<double>(i) / 9.0));
    }

    // pipeline
    if (j.contains("pipeline")) {
        for (const auto& v : j["pipeline"]) {
            const std::string s = v.get<std::string>();
            if (s == "forward") rc.stages.push_back(Stage::forward);
            else if (s == "fit") rc.stages.push_back(Stage::fit);
            else if (s == "extract") rc.stages.push_back(Stage::extract);
            else if (s == "reconstruct") rc.stages.push_back(Stage::reconstruct);
            else if (s == "continue") rc.stages.push_back(Stage::continuation);
            else throw input_error("config: unknown pipeline stage '" + s + "'");
        }
    }

    // inversion
    if (j.contains("inversion")) {
        const Json& ji = j["inversion"];
        reject_unknown_keys(ji, {"m_max", "ridge", "targets", "density_model"}, "inversion");
        rc.m_max = ji.value("m_max", rc.m_max);
        rc.ridge = ji.value("ridge", rc.ridge);
        if (rc.m_max < 0) throw input_error("config: inversion.m_max must be nonnegative");
        if (ji.contains("targets")) {
            rc.targets.clear();
            for (const auto& v : ji["targets"]) {
                const std::string s = v.get<std::string>();
                if (s == "rho_g") rc.targets.push_back(MomentTarget::rho_g);
                else if (s == "rho_f") rc.targets.push_back(MomentTarget::rho_f);
                else throw input_error("config: unknown inversion target '" + s + "'");
            }
        }
        if (ji.contains("density_model")) {
            const std::string s = ji["density_model"].get<std::string>();
            if (s == "none") rc.density_model = DensityModel::none;
            else if (s == "constant") rc.density_model = DensityModel::constant;
            else if (s == "inclusion") rc.density_model = DensityModel::inclusion;
            else throw input_error("config: unknown density model '" + s + "'");
        }
    }

    rc.output_dir = j.value("output_dir", "out");
    return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("config: cannot open " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw input_error(std::string("config: ") + e.what());
    }
    return parse_run_config(j);
}

} // namespace plateinv
