#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qdt/operators.hpp"

using namespace qdt;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXcd dense(const SparseOperator& A) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(Eigen::Index(A.dim()), Eigen::Index(A.dim()));
    for (std::size_t r = 0; r < A.dim(); ++r)
        for (std::int64_t m = A.row_ptr()[r]; m < A.row_ptr()[r + 1]; ++m)
            M(Eigen::Index(r), A.cols()[std::size_t(m)]) = A.values()[std::size_t(m)];
    return M;
}

// smallest eigenvalue of Gamma = i (H - H^dag)/2 via a dense eigensolve
double min_gamma_eigenvalue(const SparseOperator& H) {
    const Eigen::MatrixXcd M = dense(H);
    const Eigen::MatrixXcd G = cplx(0, 0.5) * (M - M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    return es.eigenvalues().minCoeff();
}

} // namespace

TEST_CASE("1d laplacian rows: Dirichlet elimination and Robin roof") {
    const double h = 0.25;
    SparseOperator A = assemble_laplacian_1d(8, h, Face1D::dirichlet_both, 0.0);

    // first interior row: diagonal 1/h^2, right neighbour -1/(2h^2), no left entry
    CHECK(A.entry(1, 1) == cplx(1.0 / (h * h), 0.0));
    CHECK(A.entry(1, 2) == cplx(-0.5 / (h * h), 0.0));
    CHECK(A.entry(1, 0) == cplx(0.0, 0.0));

    // interior row: central kinetic stencil
    CHECK(A.entry(3, 2) == cplx(-0.5 / (h * h), 0.0));
    CHECK(A.entry(3, 3) == cplx(1.0 / (h * h), 0.0));
    CHECK(A.entry(3, 4) == cplx(-0.5 / (h * h), 0.0));

    // pinned faces: zero rows
    CHECK(A.entry(0, 0) == cplx(0.0, 0.0));
    CHECK(A.entry(7, 7) == cplx(0.0, 0.0));
    CHECK(A.hermitian());

    const double kappa = kPi;
    SparseOperator R = assemble_laplacian_1d(8, h, Face1D::dirichlet_bottom_robin_top, kappa);
    CHECK(R.entry(7, 7).real() == doctest::Approx(0.5 / (h * h)));
    CHECK(R.entry(7, 7).imag() == doctest::Approx(-kappa / (2 * h)));
    CHECK(R.entry(7, 6) == cplx(-0.5 / (h * h), 0.0));
    CHECK_FALSE(R.hermitian());

    // kappa = 0 reduces to a Neumann-type roof row
    SparseOperator N = assemble_laplacian_1d(8, h, Face1D::dirichlet_bottom_robin_top, 0.0);
    CHECK(N.entry(7, 7) == cplx(0.5 / (h * h), 0.0));
    CHECK(N.hermitian());

    CHECK_THROWS_AS((void)assemble_laplacian_1d(2, h, Face1D::dirichlet_both, 0.0), ConfigError);
}

namespace {

PhysicsConfig tiny_physics(SpinMode mode) {
    PhysicsConfig p;
    p.omega = 3.0;
    p.L = 1.5;
    p.mode = mode;
    if (mode == SpinMode::spinor) p.spinor = BlochSpinor{kPi / 3, 0.4};
    return p;
}

} // namespace

TEST_CASE("hamiltonian with no detector terms is hermitian") {
    GridSpec g = GridSpec::make(1.0, 1.0, 1.5, 5, 5, 6);
    SparseOperator H = assemble_hamiltonian(g, tiny_physics(SpinMode::scalar),
                                            DetectorModel::none());
    CHECK(H.hermitian());
    CHECK(H.max_asymmetry() <= 1e-14);
}

TEST_CASE("spinor ABC blocks live on the roof layer and satisfy C_updown = C_downup^dag") {
    GridSpec g = GridSpec::make(1.0, 1.0, 1.5, 5, 6, 6);
    const std::size_t n = g.size();
    SparseOperator H = assemble_hamiltonian(g, tiny_physics(SpinMode::spinor),
                                            DetectorModel::abc_spinor(kPi));
    CHECK(H.dim() == 2 * n);

    // every cross-spin entry has row and column on layer k = Nz-1
    for (std::size_t r = 0; r < 2 * n; ++r) {
        for (std::int64_t m = H.row_ptr()[r]; m < H.row_ptr()[r + 1]; ++m) {
            const std::size_t c = std::size_t(H.cols()[std::size_t(m)]);
            const bool cross = (r < n) != (c < n);
            if (!cross) continue;
            const auto [ri, rj, rk] = g.coords(r % n);
            const auto [ci, cj, ck] = g.coords(c % n);
            (void)ri; (void)rj; (void)ci; (void)cj;
            CHECK(rk == g.Nz - 1);
            CHECK(ck == g.Nz - 1);
        }
    }

    // structural identity on the blocks
    for (std::size_t r = 0; r < n; ++r)
        for (std::int64_t m = H.row_ptr()[r]; m < H.row_ptr()[r + 1]; ++m) {
            const std::size_t c = std::size_t(H.cols()[std::size_t(m)]);
            if (c < n) continue; // up-up
            const cplx updown = H.values()[std::size_t(m)];
            const cplx downup = H.entry(std::int64_t(c), std::int64_t(r));
            CHECK(std::abs(updown - std::conj(downup)) <= 1e-14);
        }
}

TEST_CASE("Gamma is positive semidefinite on tiny grids (dense eigensolve)") {
    GridSpec g = GridSpec::make(1.0, 1.0, 1.5, 4, 4, 6);

    SUBCASE("CAP") {
        SparseOperator H = assemble_hamiltonian(g, tiny_physics(SpinMode::scalar),
                                                DetectorModel::cap_tanh(1.0, 0.1, 40.0, 1.5));
        CHECK(min_gamma_eigenvalue(H) >= -1e-10);
    }
    SUBCASE("spinless ABC") {
        SparseOperator H = assemble_hamiltonian(g, tiny_physics(SpinMode::scalar),
                                                DetectorModel::abc_spinless(kPi));
        CHECK(min_gamma_eigenvalue(H) >= -1e-10);
    }
    SUBCASE("spinor ABC") {
        SparseOperator H = assemble_hamiltonian(g, tiny_physics(SpinMode::spinor),
                                                DetectorModel::abc_spinor(kPi));
        CHECK(min_gamma_eigenvalue(H) >= -1e-10);
    }
}

TEST_CASE("CAP with W = 0 stays hermitian") {
    GridSpec g = GridSpec::make(1.0, 1.0, 1.5, 5, 5, 6);
    // cubic ramp with z0 just below L and tiny w: W = 0 on every node below z0
    DetectorModel cap = DetectorModel::cap_cubic(1.4999, 1.0, 1e-30, 1.5);
    SparseOperator H = assemble_hamiltonian(g, tiny_physics(SpinMode::scalar), cap);
    CHECK(H.max_asymmetry() <= 1e-14);
}

TEST_CASE("kronecker sum applied to a product state equals the sum of 1d actions") {
    GridSpec g = GridSpec::make(1.2, 0.9, 1.5, 6, 5, 7);
    PhysicsConfig phys = tiny_physics(SpinMode::scalar);
    phys.omega = 0.0; // kinetic-only comparison
    SparseOperator H = assemble_hamiltonian(g, phys, DetectorModel::none());

    SparseOperator Lx = assemble_laplacian_1d(g.Nx, g.hx, Face1D::dirichlet_both, 0.0);
    SparseOperator Ly = assemble_laplacian_1d(g.Ny, g.hy, Face1D::dirichlet_both, 0.0);
    SparseOperator Lz = assemble_laplacian_1d(g.Nz, g.hz, Face1D::dirichlet_both, 0.0);

    auto fx = [&](int i) { return std::sin(kPi * g.x(i) / g.Lx); };
    auto fy = [&](int j) { return std::sin(2 * kPi * g.y(j) / g.Ly); };
    auto fz = [&](int k) { return std::sin(kPi * g.z(k) / (g.Lz - g.hz)); };

    std::vector<cplx> v(g.size());
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j)
            for (int k = 0; k < g.Nz; ++k) v[g.index(i, j, k)] = fx(i) * fy(j) * fz(k);

    std::vector<cplx> got(g.size());
    H.mul(v, got);

    std::vector<cplx> ax(g.Nx), bx(g.Nx), ay(g.Ny), by(g.Ny), az(g.Nz), bz(g.Nz);
    for (int i = 0; i < g.Nx; ++i) ax[i] = fx(i);
    for (int j = 0; j < g.Ny; ++j) ay[j] = fy(j);
    for (int k = 0; k < g.Nz; ++k) az[k] = fz(k);
    Lx.mul(ax, bx);
    Ly.mul(ay, by);
    Lz.mul(az, bz);

    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j)
            for (int k = 0; k < g.Nz; ++k) {
                const cplx want = bx[i] * ay[j] * az[k] + ax[i] * by[j] * az[k] +
                                  ax[i] * ay[j] * bz[k];
                CHECK(std::abs(got[g.index(i, j, k)] - want) <= 1e-12);
            }
}

TEST_CASE("spin blindness is structural for scalar detectors in spinor mode") {
    GridSpec g = GridSpec::make(1.0, 1.0, 1.5, 5, 5, 6);
    PhysicsConfig sc = tiny_physics(SpinMode::scalar);
    PhysicsConfig sp = tiny_physics(SpinMode::spinor);
    DetectorModel det = DetectorModel::abc_spinless(kPi);

    SparseOperator Hs = assemble_hamiltonian(g, sc, det);
    SparseOperator Hp = assemble_hamiltonian(g, sp, det);

    std::vector<cplx> psi(g.size());
    for (std::size_t l = 0; l < g.size(); ++l)
        psi[l] = cplx(std::sin(0.1 * double(l)), std::cos(0.2 * double(l)));

    const cplx cu = sp.spinor->up(), cd = sp.spinor->down();
    std::vector<cplx> big(2 * g.size());
    for (std::size_t l = 0; l < g.size(); ++l) {
        big[l] = cu * psi[l];
        big[g.size() + l] = cd * psi[l];
    }

    std::vector<cplx> got(2 * g.size()), want(g.size());
    Hp.mul(big, got);
    Hs.mul(psi, want);
    for (std::size_t l = 0; l < g.size(); ++l) {
        CHECK(std::abs(got[l] - cu * want[l]) <= 1e-13);
        CHECK(std::abs(got[g.size() + l] - cd * want[l]) <= 1e-13);
    }
}

TEST_CASE("spinor ABC in scalar mode is a configuration error") {
    GridSpec g = GridSpec::make(1.0, 1.0, 1.5, 5, 5, 6);
    CHECK_THROWS_AS((void)assemble_hamiltonian(g, tiny_physics(SpinMode::scalar),
                                               DetectorModel::abc_spinor(kPi)),
                    ConfigError);
}

TEST_CASE("discrete roof flux identity on a manufactured ABC field") {
    // field satisfying the one-sided discrete ABC exactly:
    // psi_{k} = (1 + i kappa h)^k, so (psi_k - psi_{k-1})/h = i kappa psi_{k-1}
    const double kappa = kPi;
    auto check_at = [&](int Nz) {
        const double h = 1.0 / Nz;
        std::vector<cplx> psi(static_cast<std::size_t>(Nz));
        cplx v(1.0, 0.0);
        const cplx growth(1.0, kappa * h);
        for (int k = 0; k < Nz; ++k) {
            psi[std::size_t(k)] = v;
            v *= growth;
        }
        // roof flux from the one-sided derivative at the top node
        const cplx d = (psi[std::size_t(Nz - 1)] - psi[std::size_t(Nz - 2)]) / h;
        const double flux = std::imag(std::conj(psi[std::size_t(Nz - 1)]) * d);
        const double want = kappa * std::norm(psi[std::size_t(Nz - 1)]);
        return std::abs(flux - want) / want;
    };
    const double e1 = check_at(50);
    const double e2 = check_at(100);
    CHECK(e1 < kPi / 50.0);  // within O(h_z)
    CHECK(e2 < e1);          // and shrinking under refinement
}
