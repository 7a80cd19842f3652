#include "qdt/grid.hpp"

#include <cmath>
#include <string>

namespace qdt {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

GridSpec GridSpec::make(double Lx, double Ly, double Lz, int Nx, int Ny, int Nz) {
    if (Lx <= 0 || Ly <= 0 || Lz <= 0)
        throw ConfigError("grid: box lengths must be positive");
    if (Nx < 4 || Ny < 4 || Nz < 4)
        throw ConfigError("grid: node counts must be >= 4 per axis");
    GridSpec g;
    g.Lx = Lx; g.Ly = Ly; g.Lz = Lz;
    g.Nx = Nx; g.Ny = Ny; g.Nz = Nz;
    g.hx = Lx / Nx; g.hy = Ly / Ny; g.hz = Lz / Nz;
    return g;
}

double GridSpec::min_spacing() const { return std::min(hx, std::min(hy, hz)); }

std::size_t GridSpec::index(int i, int j, int k) const {
    if (i < 0 || i >= Nx || j < 0 || j >= Ny || k < 0 || k >= Nz)
        throw std::out_of_range("grid: lattice coordinates (" + std::to_string(i) + "," +
                                std::to_string(j) + "," + std::to_string(k) + ") out of range");
    return (std::size_t(i) * Ny + j) * Nz + k;
}

std::array<int, 3> GridSpec::coords(std::size_t l) const {
    if (l >= size()) throw std::out_of_range("grid: flat index out of range");
    int k = int(l % Nz);
    int j = int((l / Nz) % Ny);
    int i = int(l / (std::size_t(Ny) * Nz));
    return {i, j, k};
}

SpinorField::SpinorField(GridSpec grid, SpinMode mode)
    : grid_(grid), mode_(mode), data_(grid.size() * (mode == SpinMode::spinor ? 2 : 1)) {}

std::span<cplx> SpinorField::down() {
    if (mode_ != SpinMode::spinor)
        throw std::logic_error("SpinorField: no down component in scalar mode");
    return {data_.data() + grid_.size(), grid_.size()};
}

std::span<const cplx> SpinorField::down() const {
    if (mode_ != SpinMode::spinor)
        throw std::logic_error("SpinorField: no down component in scalar mode");
    return {data_.data() + grid_.size(), grid_.size()};
}

std::span<const cplx> SpinorField::component(std::size_t c) const {
    return c == 0 ? up() : down();
}

double SpinorField::norm_sq() const {
    double s = 0.0;
    for (const cplx& v : data_) s += std::norm(v);
    return s * grid_.cell_volume();
}

std::vector<double> SpinorField::density() const {
    std::vector<double> rho(grid_.size());
    auto u = up();
    for (std::size_t l = 0; l < rho.size(); ++l) rho[l] = std::norm(u[l]);
    if (mode_ == SpinMode::spinor) {
        auto d = down();
        for (std::size_t l = 0; l < rho.size(); ++l) rho[l] += std::norm(d[l]);
    }
    return rho;
}

void SpinorField::scale(double s) {
    for (cplx& v : data_) v *= s;
}

template <typename T>
void diff_line(std::span<const T> u, std::span<T> du, double h, DiffRule rule) {
    const std::size_t n = u.size();
    if (rule == DiffRule::fourth_transverse) {
        if (n < 5) throw std::invalid_argument("diff_line: transverse stencil needs >= 5 nodes");
        du[0] = (u[1] - u[0]) / h;
        du[1] = (-3.0 * u[1] + 4.0 * u[2] - u[3]) / (2.0 * h);
        for (std::size_t i = 2; i + 2 < n; ++i)
            du[i] = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
        du[n - 2] = (u[n - 4] - 4.0 * u[n - 3] + 3.0 * u[n - 2]) / (2.0 * h);
        du[n - 1] = (u[n - 1] - u[n - 2]) / h;
    } else {
        if (n < 3) throw std::invalid_argument("diff_line: longitudinal stencil needs >= 3 nodes");
        du[0] = (u[1] - u[0]) / h;
        for (std::size_t k = 1; k + 1 < n; ++k)
            du[k] = (u[k + 1] - u[k - 1]) / (2.0 * h);
        du[n - 1] = (u[n - 1] - u[n - 2]) / h;
    }
}

template void diff_line<double>(std::span<const double>, std::span<double>, double, DiffRule);
template void diff_line<cplx>(std::span<const cplx>, std::span<cplx>, double, DiffRule);

template <typename T>
std::vector<T> grad_component(const GridSpec& g, std::span<const T> field, Axis axis) {
    if (field.size() != g.size())
        throw std::invalid_argument("grad_component: field size does not match grid");
    std::vector<T> out(field.size());
    const std::size_t stride_i = std::size_t(g.Ny) * g.Nz;

    if (axis == Axis::z) {
        // contiguous lines
        for (std::size_t base = 0; base < g.size(); base += g.Nz)
            diff_line<T>(field.subspan(base, g.Nz), std::span<T>(out).subspan(base, g.Nz),
                         g.hz, DiffRule::second_longitudinal);
        return out;
    }

    const int n = (axis == Axis::x) ? g.Nx : g.Ny;
    const double h = (axis == Axis::x) ? g.hx : g.hy;
    const std::size_t stride = (axis == Axis::x) ? stride_i : std::size_t(g.Nz);
    std::vector<T> line(n), dline(n);
    const int outer = (axis == Axis::x) ? g.Ny : g.Nx;
    for (int a = 0; a < outer; ++a) {
        for (int k = 0; k < g.Nz; ++k) {
            const std::size_t base =
                (axis == Axis::x) ? g.index(0, a, k) : g.index(a, 0, k);
            for (int m = 0; m < n; ++m) line[m] = field[base + m * stride];
            diff_line<T>(std::span<const T>(line), std::span<T>(dline), h,
                         DiffRule::fourth_transverse);
            for (int m = 0; m < n; ++m) out[base + m * stride] = dline[m];
        }
    }
    return out;
}

template std::vector<double> grad_component<double>(const GridSpec&, std::span<const double>, Axis);
template std::vector<cplx> grad_component<cplx>(const GridSpec&, std::span<const cplx>, Axis);

namespace {

struct CellCoord {
    int cell;
    double frac;
};

CellCoord locate(double q, double h, int n, double L, const char* axis) {
    double clamped = q < 0.0 ? 0.0 : (q > L ? L : q);
    if (std::abs(q - clamped) > h)
        throw std::domain_error(std::string("trilinear: position beyond clamp margin on ") + axis);
    int cell = int(std::floor(clamped / h));
    if (cell > n - 2) cell = n - 2;
    if (cell < 0) cell = 0;
    double frac = clamped / h - cell;
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    return {cell, frac};
}

template <typename T>
T trilinear_impl(const GridSpec& g, std::span<const T> f, const Vec3& q) {
    if (f.size() != g.size())
        throw std::invalid_argument("trilinear: field size does not match grid");
    const CellCoord cx = locate(q.x, g.hx, g.Nx, g.Lx, "x");
    const CellCoord cy = locate(q.y, g.hy, g.Ny, g.Ly, "y");
    const CellCoord cz = locate(q.z, g.hz, g.Nz, g.Lz, "z");

    const std::size_t si = std::size_t(g.Ny) * g.Nz;
    const std::size_t sj = g.Nz;
    const std::size_t base = (std::size_t(cx.cell) * g.Ny + cy.cell) * g.Nz + cz.cell;

    const double fx = cx.frac, fy = cy.frac, fz = cz.frac;
    const T c00 = f[base] * (1 - fz) + f[base + 1] * fz;
    const T c01 = f[base + sj] * (1 - fz) + f[base + sj + 1] * fz;
    const T c10 = f[base + si] * (1 - fz) + f[base + si + 1] * fz;
    const T c11 = f[base + si + sj] * (1 - fz) + f[base + si + sj + 1] * fz;
    const T c0 = c00 * (1 - fy) + c01 * fy;
    const T c1 = c10 * (1 - fy) + c11 * fy;
    return c0 * (1 - fx) + c1 * fx;
}

} // namespace

double trilinear(const GridSpec& g, std::span<const double> field, const Vec3& q) {
    return trilinear_impl<double>(g, field, q);
}

cplx trilinear(const GridSpec& g, std::span<const cplx> field, const Vec3& q) {
    return trilinear_impl<cplx>(g, field, q);
}

} // namespace qdt
