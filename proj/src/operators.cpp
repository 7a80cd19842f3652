#include "qdt/operators.hpp"

namespace qdt {

namespace {

struct Row1D {
    // (col, value) pairs of one row of a 1D operator
    std::vector<std::pair<int, cplx>> entries;
};

// Rows of the 1D kinetic operator; pinned (Dirichlet-face) rows stay empty.
std::vector<Row1D> laplacian_rows(int n, double h, Face1D face, double kappa) {
    if (n < 3) throw ConfigError("laplacian_1d: need at least 3 nodes");
    const double diag = 1.0 / (h * h);
    const double off = -0.5 / (h * h);
    const bool top_pinned = face == Face1D::dirichlet_both;
    const int last = n - 1;

    std::vector<Row1D> rows(n);
    for (int i = 1; i < n; ++i) {
        if (top_pinned && i == last) break;
        Row1D& r = rows[i];
        if (i > 1) r.entries.emplace_back(i - 1, off);
        if (i == last) {
            // Robin roof: ghost psi_n = (1 + i kappa h) psi_{n-1}
            r.entries.emplace_back(i, cplx(0.5 / (h * h), -kappa / (2.0 * h)));
        } else {
            r.entries.emplace_back(i, diag);
            const int right = i + 1;
            const bool right_pinned = top_pinned && right == last;
            if (!right_pinned) r.entries.emplace_back(right, off);
        }
    }
    return rows;
}

// Central first-derivative rows on the roof plane along one transverse axis,
// with entries into pinned edge nodes eliminated (boundary value is zero).
void append_roof_coupling(std::vector<Triplet>& out, const GridSpec& g, int axis_x,
                          cplx coeff, std::size_t row_offset, std::size_t col_offset) {
    const int k = g.Nz - 1;
    const int n = axis_x ? g.Nx : g.Ny;
    const double h = axis_x ? g.hx : g.hy;
    const cplx c = coeff / (2.0 * h);
    const int outer = axis_x ? g.Ny : g.Nx;
    for (int a = 1; a + 1 < outer; ++a) {
        for (int m = 1; m + 1 < n; ++m) {
            const int i = axis_x ? m : a;
            const int j = axis_x ? a : m;
            const std::size_t row = g.index(i, j, k);
            const int prev = m - 1, next = m + 1;
            // entries into pinned edge nodes are eliminated (value is zero)
            if (next < n - 1) {
                const std::size_t cn = axis_x ? g.index(next, j, k) : g.index(i, next, k);
                out.push_back({std::int64_t(row_offset + row), std::int64_t(col_offset + cn), c});
            }
            if (prev > 0) {
                const std::size_t cp = axis_x ? g.index(prev, j, k) : g.index(i, prev, k);
                out.push_back({std::int64_t(row_offset + row), std::int64_t(col_offset + cp), -c});
            }
        }
    }
}

} // namespace

SparseOperator assemble_laplacian_1d(int n, double h, Face1D face, double kappa) {
    auto rows = laplacian_rows(n, h, face, kappa);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i)
        for (const auto& [c, v] : rows[std::size_t(i)].entries) t.push_back({i, c, v});
    return SparseOperator::from_triplets(std::size_t(n), std::move(t));
}

SparseOperator assemble_hamiltonian(const GridSpec& grid, const PhysicsConfig& physics,
                                    const DetectorModel& detector) {
    const bool spinor_abc = detector.kind == DetectorKind::abc_spinor;
    if (spinor_abc && physics.mode != SpinMode::spinor)
        throw ConfigError("hamiltonian: the spinor ABC requires spinor mode");

    const Face1D zface = detector.is_abc() ? Face1D::dirichlet_bottom_robin_top
                                           : Face1D::dirichlet_both;
    const auto lx = laplacian_rows(grid.Nx, grid.hx, Face1D::dirichlet_both, 0.0);
    const auto ly = laplacian_rows(grid.Ny, grid.hy, Face1D::dirichlet_both, 0.0);
    const auto lz = laplacian_rows(grid.Nz, grid.hz, zface, detector.kappa);

    const std::size_t n = grid.size();
    const std::size_t dim = physics.mode == SpinMode::spinor ? 2 * n : n;
    const std::size_t blocks = physics.mode == SpinMode::spinor ? 2 : 1;

    std::vector<Triplet> t;
    t.reserve(blocks * n * 8);

    const double cx = grid.Lx / 2.0, cy = grid.Ly / 2.0;
    for (int i = 0; i < grid.Nx; ++i) {
        const double vx = grid.x(i) - cx;
        for (int j = 0; j < grid.Ny; ++j) {
            const double vy = grid.y(j) - cy;
            const double vpot = 0.5 * kMass * physics.omega * physics.omega *
                                (vx * vx + vy * vy);
            for (int k = 0; k < grid.Nz; ++k) {
                const std::size_t row = grid.index(i, j, k);
                // Kronecker sum: each axis contributes its own 1D row (empty
                // on that axis's pinned faces), plus the diagonal potential.
                cplx diag(vpot, 0.0);
                if (detector.is_cap())
                    diag -= cplx(0.0, cap_profile(grid.z(k), detector));
                std::vector<std::pair<std::size_t, cplx>> entries;
                for (const auto& [c, v] : lx[std::size_t(i)].entries) {
                    if (c == i) diag += v;
                    else entries.emplace_back(grid.index(c, j, k), v);
                }
                for (const auto& [c, v] : ly[std::size_t(j)].entries) {
                    if (c == j) diag += v;
                    else entries.emplace_back(grid.index(i, c, k), v);
                }
                for (const auto& [c, v] : lz[std::size_t(k)].entries) {
                    if (c == k) diag += v;
                    else entries.emplace_back(grid.index(i, j, c), v);
                }
                for (std::size_t b = 0; b < blocks; ++b) {
                    const std::size_t off = b * n;
                    t.push_back({std::int64_t(off + row), std::int64_t(off + row), diag});
                    for (const auto& [c, v] : entries)
                        t.push_back({std::int64_t(off + row), std::int64_t(off + c), v});
                }
            }
        }
    }

    if (spinor_abc) {
        // C_updown = +(Dx - i Dy)/(2 hz) acting on the down component,
        // C_downup = -(Dx + i Dy)/(2 hz), both confined to the roof plane.
        const cplx inv2hz(1.0 / (2.0 * grid.hz), 0.0);
        append_roof_coupling(t, grid, 1, inv2hz, 0, n);                  // up row, +Dx/(2hz) down
        append_roof_coupling(t, grid, 0, cplx(0, -1.0) * inv2hz, 0, n);  // up row, -i Dy/(2hz) down
        append_roof_coupling(t, grid, 1, -inv2hz, n, 0);                 // down row, -Dx/(2hz) up
        append_roof_coupling(t, grid, 0, cplx(0, -1.0) * inv2hz, n, 0);  // down row, -i Dy/(2hz) up
    }

    return SparseOperator::from_triplets(dim, std::move(t));
}

} // namespace qdt
