#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "plateinv/errors.hpp"

namespace plateinv {

using Vec3 = Eigen::Vector3d;

/// Regular axis-aligned voxel grid. Voxel centers are midpoints of the cells;
/// the linear index runs x fastest, then y, then z, which fixes the
/// deterministic accumulation order used by every quadrature in the project.
class VoxelGrid {
public:
    VoxelGrid(std::array<int, 3> n, Vec3 lo, Vec3 hi) : n_(n), lo_(lo), hi_(hi) {
        for (int a = 0; a < 3; ++a) {
            if (n_[static_cast<size_t>(a)] < 2) throw input_error("VoxelGrid: need >= 2 voxels per axis");
            if (!(hi_[a] > lo_[a])) throw input_error("VoxelGrid: empty bounding box");
        }
    }

    const std::array<int, 3>& dims() const { return n_; }
    const Vec3& lo() const { return lo_; }
    const Vec3& hi() const { return hi_; }

    Vec3 spacing() const {
        return Vec3((hi_.x() - lo_.x()) / n_[0], (hi_.y() - lo_.y()) / n_[1],
                    (hi_.z() - lo_.z()) / n_[2]);
    }

    double voxel_volume() const {
        const Vec3 h = spacing();
        return h.x() * h.y() * h.z();
    }

    double half_diagonal() const { return 0.5 * spacing().norm(); }

    int count() const { return n_[0] * n_[1] * n_[2]; }

    int index(int ix, int iy, int iz) const { return (iz * n_[1] + iy) * n_[0] + ix; }

    std::array<int, 3> unpack(int idx) const {
        const int ix = idx % n_[0];
        const int iy = (idx / n_[0]) % n_[1];
        const int iz = idx / (n_[0] * n_[1]);
        return {ix, iy, iz};
    }

    Vec3 center(int idx) const {
        const auto [ix, iy, iz] = unpack(idx);
        const Vec3 h = spacing();
        return Vec3(lo_.x() + (ix + 0.5) * h.x(), lo_.y() + (iy + 0.5) * h.y(),
                    lo_.z() + (iz + 0.5) * h.z());
    }

    bool same_layout(const VoxelGrid& other) const {
        return n_ == other.n_ && lo_ == other.lo_ && hi_ == other.hi_;
    }

private:
    std::array<int, 3> n_;
    Vec3 lo_, hi_;
};

using GridPtr = std::shared_ptr<const VoxelGrid>;

inline GridPtr make_grid(std::array<int, 3> n, Vec3 lo, Vec3 hi) {
    return std::make_shared<const VoxelGrid>(n, lo, hi);
}

inline GridPtr make_grid(int n, Vec3 lo, Vec3 hi) { return make_grid({n, n, n}, lo, hi); }

using Mask = std::vector<std::uint8_t>;

/// One sample per voxel.
template <typename T>
struct ScalarField {
    GridPtr grid;
    std::vector<T> values;

    ScalarField() = default;
    ScalarField(GridPtr g, T fill = T{})
        : grid(std::move(g)), values(static_cast<size_t>(grid->count()), fill) {}

    T& operator[](int i) { return values[static_cast<size_t>(i)]; }
    const T& operator[](int i) const { return values[static_cast<size_t>(i)]; }
    int size() const { return static_cast<int>(values.size()); }
};

using ScalarFieldR = ScalarField<double>;
using ScalarFieldC = ScalarField<std::complex<double>>;

template <typename A, typename B>
void require_same_grid(const ScalarField<A>& a, const ScalarField<B>& b, const char* who) {
    if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid))
        throw input_error(std::string(who) + ": fields live on different grids");
}

/// Compact domain geometry: the support set Omega inside the measurement ball
/// B_R, plus an optional inclusion subset Omega_0.
struct DomainSpec {
    GridPtr grid;
    Mask omega_mask;
    double R = 0.0;
    std::optional<Mask> inclusion_mask;

    DomainSpec(GridPtr g, Mask omega, double radius, std::optional<Mask> inclusion = std::nullopt)
        : grid(std::move(g)), omega_mask(std::move(omega)), R(radius),
          inclusion_mask(std::move(inclusion)) {
        if (R <= 0.0) throw input_error("DomainSpec: R must be positive");
        if (static_cast<int>(omega_mask.size()) != grid->count())
            throw input_error("DomainSpec: omega mask size mismatch");
        const double hd = grid->half_diagonal();
        for (int i = 0; i < grid->count(); ++i) {
            if (!omega_mask[static_cast<size_t>(i)]) continue;
            if (grid->center(i).norm() + hd >= R)
                throw input_error("DomainSpec: Omega voxel reaches the measurement sphere B_R");
        }
        if (inclusion_mask) {
            if (static_cast<int>(inclusion_mask->size()) != grid->count())
                throw input_error("DomainSpec: inclusion mask size mismatch");
            for (int i = 0; i < grid->count(); ++i)
                if ((*inclusion_mask)[static_cast<size_t>(i)] && !omega_mask[static_cast<size_t>(i)])
                    throw input_error("DomainSpec: inclusion must lie inside Omega");
        }
    }

    std::vector<int> omega_voxels() const {
        std::vector<int> out;
        for (int i = 0; i < grid->count(); ++i)
            if (omega_mask[static_cast<size_t>(i)]) out.push_back(i);
        return out;
    }
};

} // namespace plateinv
