#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qdt/errors.hpp"

namespace qdt {

using cplx = std::complex<double>;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const;
};

// Uniform Cartesian lattice on [0,Lx]x[0,Ly]x[0,Lz]. Nodes sit at i*h per
// axis, i = 0..N-1, with h = L/N; there is no node on the top face of any
// axis (the last node is L - h). The last z node is the on-grid counting
// plane used for roof flux and trajectory first hits.
struct GridSpec {
    double Lx = 0, Ly = 0, Lz = 0;
    int Nx = 0, Ny = 0, Nz = 0;
    double hx = 0, hy = 0, hz = 0;

    static GridSpec make(double Lx, double Ly, double Lz, int Nx, int Ny, int Nz);

    std::size_t size() const { return std::size_t(Nx) * Ny * Nz; }
    double cell_volume() const { return hx * hy * hz; }
    double min_spacing() const;

    double x(int i) const { return i * hx; }
    double y(int j) const { return j * hy; }
    double z(int k) const { return k * hz; }

    // Height of the on-grid counting plane z_{Nz-1} = Lz - hz.
    double counting_plane_z() const { return (Nz - 1) * hz; }

    // Lexicographic flattening: z fastest, then y, then x.
    std::size_t index(int i, int j, int k) const;
    std::array<int, 3> coords(std::size_t l) const;
};

enum class SpinMode { scalar, spinor };

// Complex amplitudes on the grid at one instant. The flattened state vector
// is up||down with the grid's lexicographic ordering; scalar runs store only
// the up component.
class SpinorField {
public:
    SpinorField(GridSpec grid, SpinMode mode);

    const GridSpec& grid() const { return grid_; }
    SpinMode mode() const { return mode_; }
    std::size_t components() const { return mode_ == SpinMode::spinor ? 2 : 1; }

    std::span<cplx> up() { return {data_.data(), grid_.size()}; }
    std::span<const cplx> up() const { return {data_.data(), grid_.size()}; }
    std::span<cplx> down();
    std::span<const cplx> down() const;
    std::span<const cplx> component(std::size_t c) const;

    std::vector<cplx>& flat() { return data_; }
    const std::vector<cplx>& flat() const { return data_; }

    // Discrete squared norm: sum of |amplitude|^2 times the cell volume.
    double norm_sq() const;

    // |up|^2 (+ |down|^2) per node.
    std::vector<double> density() const;

    void scale(double s);

private:
    GridSpec grid_;
    SpinMode mode_;
    std::vector<cplx> data_;
};

enum class Axis { x, y, z };

// First-derivative stencil family. The transverse rule uses the fourth-order
// central stencil in the interior with second-order one-sided rows at the
// first/last interior indices and first-order one-sided rows on the faces.
// The longitudinal rule stays second-order central with first-order faces so
// it remains consistent with the second-order roof row.
enum class DiffRule { fourth_transverse, second_longitudinal };

template <typename T>
void diff_line(std::span<const T> u, std::span<T> du, double h, DiffRule rule);

// d(field)/d(axis) on the whole grid. x,y use fourth_transverse, z uses
// second_longitudinal.
template <typename T>
std::vector<T> grad_component(const GridSpec& grid, std::span<const T> field, Axis axis);

// Trilinear interpolation of a node field at position q. Positions up to one
// spacing outside a face are clamped onto the outermost cell; anything
// farther out is a domain error.
double trilinear(const GridSpec& grid, std::span<const double> field, const Vec3& q);
cplx trilinear(const GridSpec& grid, std::span<const cplx> field, const Vec3& q);

} // namespace qdt
