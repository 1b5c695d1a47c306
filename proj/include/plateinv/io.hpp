#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "plateinv/asymptotics.hpp"
#include "plateinv/moments.hpp"
#include "plateinv/reconstruct.hpp"

namespace plateinv {

namespace io {

/// Shortest exact decimal for doubles, fixed across platforms we build on.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string config_hash_line(const std::string& hash) { return "# config " + hash + "\n"; }

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open output file: " + path.string());
    out << content;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

// ---------------------------------------------------------------------------
// MeasurementSet
// ---------------------------------------------------------------------------

inline std::string measurement_csv(const MeasurementSet& ms, const std::string& hash) {
    std::string s = config_hash_line(hash);
    s += "kappa,node_index,x,y,z,re_u,im_u,re_lap_u,im_lap_u\n";
    for (size_t k = 0; k < ms.kappas.size(); ++k) {
        const auto& tr = ms.traces[k];
        for (int i = 0; i < ms.mesh.node_count(); ++i) {
            const size_t q = static_cast<size_t>(i);
            const Vec3& x = ms.mesh.nodes[q];
            s += fmt(ms.kappas[k]) + ',' + std::to_string(i) + ',' + fmt(x.x()) + ',' + fmt(x.y()) +
                 ',' + fmt(x.z()) + ',' + fmt(tr.u[q].real()) + ',' + fmt(tr.u[q].imag()) + ',' +
                 fmt(tr.lap_u[q].real()) + ',' + fmt(tr.lap_u[q].imag()) + '\n';
        }
    }
    return s;
}

/// Rebuild a MeasurementSet from its CSV; the mesh must be supplied (the file
/// stores node positions only for plotting).
inline MeasurementSet read_measurement_csv(const std::filesystem::path& path, const SphereMesh& mesh) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot read measurement file: " + path.string());
    MeasurementSet ms;
    ms.mesh = mesh;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "kappa,node_index,x,y,z,re_u,im_u,re_lap_u,im_lap_u")
                throw input_error("measurement file has an unexpected header: " + line);
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) throw input_error("measurement file row is malformed");
        const double kappa = std::stod(cells[0]);
        const int node = std::stoi(cells[1]);
        if (ms.kappas.empty() || ms.kappas.back() != kappa) {
            ms.kappas.push_back(kappa);
            ms.traces.emplace_back();
            ms.traces.back().u.assign(static_cast<size_t>(mesh.node_count()), Complex{0, 0});
            ms.traces.back().lap_u.assign(static_cast<size_t>(mesh.node_count()), Complex{0, 0});
        }
        if (node < 0 || node >= mesh.node_count())
            throw input_error("measurement file node index out of range");
        ms.traces.back().u[static_cast<size_t>(node)] = Complex(std::stod(cells[5]), std::stod(cells[6]));
        ms.traces.back().lap_u[static_cast<size_t>(node)] =
            Complex(std::stod(cells[7]), std::stod(cells[8]));
    }
    if (ms.kappas.empty()) throw input_error("measurement file holds no data rows");
    return ms;
}

// ---------------------------------------------------------------------------
// ExpansionTable (two files: u powers -1..3 and lap powers 0..3)
// ---------------------------------------------------------------------------

inline std::string expansion_csv(const ExpansionTable& t, bool lap_family, const std::string& hash) {
    std::string s = config_hash_line(hash);
    s += "node_index,power,re_c,im_c,residual,provenance\n";
    const char* prov = t.provenance == ExpansionTable::Provenance::analytic ? "analytic" : "fitted";
    const double resid = lap_family ? t.diag.residual_lap : t.diag.residual_u;
    auto row = [&](int node, int power, const Complex& c) {
        s += std::to_string(node) + ',' + std::to_string(power) + ',' + fmt(c.real()) + ',' +
             fmt(c.imag()) + ',' + fmt(resid) + ',' + prov + '\n';
    };
    for (int p = 0; p < t.node_count(); ++p) {
        const size_t q = static_cast<size_t>(p);
        if (lap_family) {
            row(p, 0, t.N0[q]);
            row(p, 1, t.N1[q]);
            row(p, 2, t.N2[q]);
            row(p, 3, t.N3[q]);
        } else {
            row(p, -1, t.Mm1[q]);
            row(p, 0, t.M0[q]);
            row(p, 1, t.M1[q]);
            row(p, 2, t.M2[q]);
            row(p, 3, t.M3[q]);
        }
    }
    return s;
}

inline void read_expansion_csv(const std::filesystem::path& path, bool lap_family, ExpansionTable& t,
                               int node_count) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot read expansion file: " + path.string());
    auto resize = [&](std::vector<Complex>& v) { v.assign(static_cast<size_t>(node_count), Complex{0, 0}); };
    if (lap_family) {
        resize(t.N0);
        resize(t.N1);
        resize(t.N2);
        resize(t.N3);
    } else {
        resize(t.Mm1);
        resize(t.M0);
        resize(t.M1);
        resize(t.M2);
        resize(t.M3);
    }
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "node_index,power,re_c,im_c,residual,provenance")
                throw input_error("expansion file has an unexpected header: " + line);
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 6) throw input_error("expansion file row is malformed");
        const int node = std::stoi(cells[0]);
        const int power = std::stoi(cells[1]);
        if (node < 0 || node >= node_count) throw input_error("expansion file node index out of range");
        const Complex c(std::stod(cells[2]), std::stod(cells[3]));
        const size_t q = static_cast<size_t>(node);
        if (lap_family) {
            if (power == 0) t.N0[q] = c;
            else if (power == 1) t.N1[q] = c;
            else if (power == 2) t.N2[q] = c;
            else if (power == 3) t.N3[q] = c;
            else throw input_error("expansion file power out of range");
        } else {
            if (power == -1) t.Mm1[q] = c;
            else if (power == 0) t.M0[q] = c;
            else if (power == 1) t.M1[q] = c;
            else if (power == 2) t.M2[q] = c;
            else if (power == 3) t.M3[q] = c;
            else throw input_error("expansion file power out of range");
        }
        t.provenance = (cells[5] == "analytic") ? ExpansionTable::Provenance::analytic
                                                : ExpansionTable::Provenance::fitted;
    }
    if (!header_seen) throw input_error("expansion file holds no data");
}

// ---------------------------------------------------------------------------
// MomentTable
// ---------------------------------------------------------------------------

inline std::string moment_csv(const MomentTable& mt, const std::string& hash) {
    std::string s = config_hash_line(hash);
    s += "m,n,re,im,target,m_max\n";
    for (int m = 0; m <= mt.m_max; ++m)
        for (int n = -m; n <= m; ++n) {
            const Complex v = mt.at(m, n);
            s += std::to_string(m) + ',' + std::to_string(n) + ',' + fmt(v.real()) + ',' +
                 fmt(v.imag()) + ',' + to_string(mt.target) + ',' + std::to_string(mt.m_max) + '\n';
        }
    return s;
}

inline MomentTable read_moment_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot read moment file: " + path.string());
    MomentTable mt;
    std::string line;
    bool header_seen = false;
    std::vector<std::tuple<int, int, Complex>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "m,n,re,im,target,m_max")
                throw input_error("moment file has an unexpected header: " + line);
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 6) throw input_error("moment file row is malformed");
        rows.emplace_back(std::stoi(cells[0]), std::stoi(cells[1]),
                          Complex(std::stod(cells[2]), std::stod(cells[3])));
        mt.target = (cells[4] == "rho_f") ? MomentTarget::rho_f : MomentTarget::rho_g;
        mt.m_max = std::stoi(cells[5]);
    }
    if (rows.empty()) throw input_error("moment file holds no data rows");
    mt.entries.assign(static_cast<size_t>(sh_count(mt.m_max)), Complex{0, 0});
    for (const auto& [m, n, v] : rows) {
        if (m < 0 || m > mt.m_max || n < -m || n > m) throw input_error("moment file index out of range");
        mt.entries[static_cast<size_t>(sh_flat(m, n))] = v;
    }
    return mt;
}

// ---------------------------------------------------------------------------
// recovered 2D profiles
// ---------------------------------------------------------------------------

/// Dense (ny x nx) grid of the recovered cross-section profile, zero outside
/// the active pixels; rows run over y, columns over x.
inline std::string profile_csv(const ProfileRecovery& rec, const GridPtr& grid, const std::string& hash) {
    const auto& n = grid->dims();
    std::vector<double> dense(static_cast<size_t>(n[0] * n[1]), 0.0);
    for (int j = 0; j < rec.cross_section.count(); ++j)
        dense[static_cast<size_t>(rec.cross_section.iy[static_cast<size_t>(j)] * n[0] +
                                  rec.cross_section.ix[static_cast<size_t>(j)])] =
            rec.values[static_cast<size_t>(j)];
    std::string s = config_hash_line(hash);
    for (int iy = 0; iy < n[1]; ++iy) {
        for (int ix = 0; ix < n[0]; ++ix) {
            if (ix) s += ',';
            s += fmt(dense[static_cast<size_t>(iy * n[0] + ix)]);
        }
        s += '\n';
    }
    return s;
}

} // namespace io

} // namespace plateinv
