// Slab meshes: unit-period torus in the horizontal directions, walls (or a
// periodic test mode) in the vertical direction z in (0,1).
#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace stratlab {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return dot(a, a); }

enum class BoundaryKind { Periodic, Wall };

// Cells are uniform boxes; the last axis is vertical.  Horizontal axes have
// extent exactly 1 (unit torus); the vertical axis spans (0,1).
class Mesh {
public:
    Mesh() = default;

    // ndim = 2: axes (x, z); ndim = 3: axes (x, y, z).
    Mesh(int ndim, std::array<int, 3> cells, BoundaryKind vertical = BoundaryKind::Wall)
        : ndim_(ndim), cells_(cells), vertical_(vertical) {
        if (ndim < 2 || ndim > 3) throw std::invalid_argument("Mesh: ndim must be 2 or 3");
        if (ndim == 2) cells_[2] = 1;  // unused slot
        for (int d = 0; d < ndim; ++d) {
            if (cells_[d] < 1) throw std::invalid_argument("Mesh: nonpositive cell count");
        }
        n_[0] = cells_[0];
        n_[1] = (ndim == 3) ? cells_[1] : 1;
        n_[2] = (ndim == 3) ? cells_[2] : cells_[1];
        for (int d = 0; d < 3; ++d) h_[d] = 1.0 / n_[d];
    }

    static Mesh slab2d(int nx, int nz, BoundaryKind vertical = BoundaryKind::Wall) {
        return Mesh(2, {nx, nz, 1}, vertical);
    }
    static Mesh slab3d(int nx, int ny, int nz, BoundaryKind vertical = BoundaryKind::Wall) {
        return Mesh(3, {nx, ny, nz}, vertical);
    }
    // Fully periodic unit torus (test mode / oscillation domains).
    static Mesh torus2d(int nx, int ny) { return Mesh(2, {nx, ny, 1}, BoundaryKind::Periodic); }

    int ndim() const { return ndim_; }
    // Grid sizes in storage order (nx, ny, nz); ny == 1 in 2-D.
    int nx() const { return n_[0]; }
    int ny() const { return n_[1]; }
    int nz() const { return n_[2]; }
    std::size_t cell_count() const {
        return std::size_t(n_[0]) * std::size_t(n_[1]) * std::size_t(n_[2]);
    }

    double hx() const { return 1.0 / n_[0]; }
    double hy() const { return 1.0 / n_[1]; }
    double hz() const { return 1.0 / n_[2]; }
    // Spacing along a *logical* axis d in [0, ndim): horizontal first, vertical last.
    double spacing(int axis) const { return axis == ndim_ - 1 ? hz() : (axis == 0 ? hx() : hy()); }
    double cell_volume() const { return hx() * hy() * hz(); }

    bool vertical_periodic() const { return vertical_ == BoundaryKind::Periodic; }

    std::size_t index(int i, int j, int k) const {
        return (std::size_t(k) * n_[1] + j) * n_[0] + i;
    }

    double xc(int i) const { return (i + 0.5) * hx(); }
    double yc(int j) const { return (j + 0.5) * hy(); }
    double zc(int k) const { return (k + 0.5) * hz(); }

    // Cell-center coordinate vector; in 2-D the y slot mirrors the vertical
    // coordinate into position 1 so callers can treat (x, z) uniformly.
    Vec3 center(int i, int j, int k) const {
        if (ndim_ == 2) return {xc(i), zc(k), 0.0};
        return {xc(i), yc(j), zc(k)};
    }

    // Counts along logical axes: axis 0 = x, axis ndim-1 = vertical.
    int cells_along(int axis) const {
        if (axis == 0) return n_[0];
        if (axis == ndim_ - 1) return n_[2];
        return n_[1];
    }

    bool same_shape(const Mesh& other) const {
        return ndim_ == other.ndim_ && n_ == other.n_ && vertical_ == other.vertical_;
    }

    std::string describe() const {
        std::string s = std::to_string(n_[0]);
        if (ndim_ == 3) s += "x" + std::to_string(n_[1]);
        s += "x" + std::to_string(n_[2]);
        return s;
    }

private:
    int ndim_ = 2;
    std::array<int, 3> cells_{1, 1, 1};
    BoundaryKind vertical_ = BoundaryKind::Wall;
    std::array<int, 3> n_{1, 1, 1};  // storage sizes (nx, ny, nz)
    std::array<double, 3> h_{1, 1, 1};
};

}  // namespace stratlab
