#include <doctest.h>

#include <cmath>
#include <random>

#include "qdt/observables.hpp"
#include "qdt/operators.hpp"

using namespace qdt;

namespace {

constexpr double kPi = 3.14159265358979323846;

// spinor test field confined away from the lateral walls
SpinorField gaussian_spinor(const GridSpec& g, double theta, double phi, double pz,
                            double omega = 6.0) {
    PhysicsConfig phys;
    phys.omega = omega;
    phys.L = g.Lz;
    phys.mode = SpinMode::spinor;
    phys.spinor = BlochSpinor{theta, phi};
    SpinorField f = initial_state(g, phys);
    auto u = f.up();
    auto d = f.down();
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j)
            for (int k = 0; k < g.Nz; ++k) {
                const cplx ph = std::polar(1.0, pz * g.z(k));
                u[g.index(i, j, k)] *= ph;
                d[g.index(i, j, k)] *= ph;
            }
    return f;
}

} // namespace

TEST_CASE("convective current of a z plane wave") {
    GridSpec g = GridSpec::make(1, 1, 4, 5, 5, 80);
    SpinorField f(g, SpinMode::scalar);
    const double p = 2.0;
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j)
            for (int k = 0; k < g.Nz; ++k)
                f.up()[g.index(i, j, k)] = std::polar(1.0, p * g.z(k));
    CurrentField j = convective_current(f);
    // interior node: jz = p/m + O(hz^2)
    const double hz = g.hz;
    CHECK(j.jz[g.index(2, 2, 40)] ==
          doctest::Approx(std::sin(p * hz) / hz).epsilon(1e-10));
    CHECK(j.jz[g.index(2, 2, 40)] == doctest::Approx(p).epsilon(5e-3));
}

TEST_CASE("real fields carry no convective current and a global phase changes nothing") {
    GridSpec g = GridSpec::make(2, 2, 2, 8, 8, 8);
    PhysicsConfig phys;
    phys.omega = 5.0;
    phys.L = 2.0;
    SpinorField f = initial_state(g, phys); // real Gaussian profile
    CurrentField j = convective_current(f);
    for (std::size_t l = 0; l < g.size(); ++l) {
        CHECK(std::abs(j.jx[l]) <= 1e-14);
        CHECK(std::abs(j.jy[l]) <= 1e-14);
        CHECK(std::abs(j.jz[l]) <= 1e-14);
    }

    SpinorField f2 = f;
    for (cplx& v : f2.flat()) v *= std::polar(1.0, 1.234);
    CurrentField j2 = convective_current(f2);
    for (std::size_t l = 0; l < g.size(); ++l)
        CHECK(j2.jz[l] == doctest::Approx(j.jz[l]).epsilon(1e-12));
}

TEST_CASE("pauli current: theta = 0 leaves jz untouched") {
    GridSpec g = GridSpec::make(2, 2, 3, 10, 10, 24);
    SpinorField f = gaussian_spinor(g, 0.0, 0.0, 1.5);
    CurrentField jc = convective_current(f);
    CurrentField jp = pauli_current(f);
    for (std::size_t l = 0; l < g.size(); ++l)
        CHECK(jp.jz[l] == doctest::Approx(jc.jz[l]).epsilon(1e-12));
}

TEST_CASE("pauli curl term equals the Bloch-vector form on a product state") {
    GridSpec g = GridSpec::make(2, 2, 3, 10, 12, 24);
    const double theta = kPi / 3, phi = 0.7;
    SpinorField f = gaussian_spinor(g, theta, phi, 1.5);

    CurrentField jc = convective_current(f);
    CurrentField jp = pauli_current(f);

    // independent route: curl term = -(1/2) <chi|sigma|chi> x grad(rho)
    const BlochSpinor chi{theta, phi};
    const auto n = chi.direction();
    const auto rho = f.density();
    const auto rx = grad_component<double>(g, rho, Axis::x);
    const auto ry = grad_component<double>(g, rho, Axis::y);
    const auto rz = grad_component<double>(g, rho, Axis::z);
    for (std::size_t l = 0; l < g.size(); ++l) {
        const double cx = -0.5 * (n[1] * rz[l] - n[2] * ry[l]);
        const double cy = -0.5 * (n[2] * rx[l] - n[0] * rz[l]);
        const double cz = -0.5 * (n[0] * ry[l] - n[1] * rx[l]);
        CHECK(jp.jx[l] - jc.jx[l] == doctest::Approx(cx).epsilon(1e-10));
        CHECK(jp.jy[l] - jc.jy[l] == doctest::Approx(cy).epsilon(1e-10));
        CHECK(jp.jz[l] - jc.jz[l] == doctest::Approx(cz).epsilon(1e-10));
    }

    CHECK_THROWS_AS((void)pauli_current(SpinorField(g, SpinMode::scalar)), std::logic_error);
}

TEST_CASE("plane-integrated pauli flux equals the convective one on every layer") {
    // the curl contribution integrates to boundary-row values; the stencil's
    // one-sided rows reach three nodes in, so the state must be well dead by
    // there for the 1e-8 relative bound
    GridSpec g = GridSpec::make(2, 2, 3, 32, 32, 20);
    SpinorField f = gaussian_spinor(g, kPi / 3, 1.1, 2.0, 50.0);
    CurrentField jc = convective_current(f);
    CurrentField jp = pauli_current(f);
    double peak = 0.0;
    for (int k = 0; k < g.Nz; ++k)
        peak = std::max(peak, std::abs(plane_flux(g, jc, k)));
    for (int k = 0; k < g.Nz; ++k)
        CHECK(std::abs(plane_flux(g, jp, k) - plane_flux(g, jc, k)) <= 1e-8 * peak);
}

TEST_CASE("rho_T_flux on manufactured roof data") {
    GridSpec g = GridSpec::make(1, 1, 2, 6, 6, 10);
    DetectorModel det = DetectorModel::abc_spinless(kPi);
    SpinorField f(g, SpinMode::scalar);

    // vanishing roof layer: zero
    CHECK(rho_T_flux(f, det) == 0.0);

    // constant modulus c on M roof nodes
    const double c = 0.7;
    int M = 0;
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) {
            f.up()[g.index(i, j, g.Nz - 1)] = std::polar(c, 0.3 * i + 0.1 * j);
            ++M;
        }
    CHECK(rho_T_flux(f, det) ==
          doctest::Approx(kPi * M * c * c * g.hx * g.hy).epsilon(1e-13));

    CHECK_THROWS_AS((void)rho_T_flux(f, DetectorModel::cap_sharp(1.0, 10.0, 2.0)),
                    std::logic_error);
}

TEST_CASE("rho_T_capvolume on single-node data") {
    GridSpec g = GridSpec::make(1, 1, 2, 6, 6, 10);
    DetectorModel det = DetectorModel::cap_sharp(1.0, 25.0, 2.0);
    SpinorField f(g, SpinMode::scalar);
    CHECK(rho_T_capvolume(f, det) == 0.0);

    // one node inside the absorbing layer
    const int k = 8; // z = 1.6 > z0 = 1
    f.up()[g.index(3, 3, k)] = cplx(0.5, 0.5);
    const double p = std::norm(f.up()[g.index(3, 3, k)]) * g.cell_volume();
    CHECK(rho_T_capvolume(f, det) == doctest::Approx(2.0 * 25.0 * p).epsilon(1e-13));

    CHECK_THROWS_AS((void)rho_T_capvolume(f, DetectorModel::abc_spinless(1.0)),
                    std::logic_error);
}

TEST_CASE("restricted mean on simple series") {
    // narrow unit-mass bump at t* = 2 within cutoff 10
    std::vector<double> t, rho;
    const int n = 4001;
    const double sig = 0.05;
    for (int i = 0; i < n; ++i) {
        const double ti = 10.0 * i / (n - 1);
        t.push_back(ti);
        rho.push_back(std::exp(-0.5 * (ti - 2.0) * (ti - 2.0) / (sig * sig)) /
                      (sig * std::sqrt(2 * kPi)));
    }
    CHECK(restricted_mean(t, rho, 10.0) == doctest::Approx(2.0).epsilon(1e-4));

    // nothing detected
    std::vector<double> zero(t.size(), 0.0);
    CHECK(restricted_mean(t, zero, 10.0) == doctest::Approx(10.0));

    // half the mass at t = 2: mu* = 0.5*2 + 10*0.5 = 6
    std::vector<double> half(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) half[i] = rho[i] * 0.5;
    CHECK(restricted_mean(t, half, 10.0) == doctest::Approx(6.0).epsilon(1e-4));
}

TEST_CASE("histogram normalization") {
    // all samples in one bin
    std::vector<double> s(100, 0.35);
    Histogram h = make_histogram(s, 10, 0.0, 1.0, 100);
    CHECK(h.height[3] == doctest::Approx(10.0)); // 1/bin_width
    double area = 0;
    for (double v : h.height) area += v * 0.1;
    CHECK(area == doctest::Approx(1.0));

    // half arrived: area = 0.5
    Histogram h2 = make_histogram(s, 10, 0.0, 1.0, 200);
    double area2 = 0;
    for (double v : h2.height) area2 += v * 0.1;
    CHECK(area2 == doctest::Approx(0.5));

    CHECK_THROWS_AS((void)make_histogram(s, 10, 1.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("uniform samples stay inside the binomial band") {
    // derived oracle: per-bin count ~ Binomial(n, 1/bins)
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    const std::size_t n = 20000;
    std::vector<double> s(n);
    for (double& v : s) v = U(rng);
    const int bins = 10;
    Histogram h = make_histogram(s, bins, 0.0, 1.0, n);
    const double p = 1.0 / bins;
    const double sd = std::sqrt(double(n) * p * (1 - p));
    for (int b = 0; b < bins; ++b)
        CHECK(std::abs(double(h.count[std::size_t(b)]) - double(n) * p) <= 3 * sd + 1);
}

TEST_CASE("detection series from a synthetic exponential decay") {
    // norms n(t) = exp(-g t): rho = g exp(-g t)
    const double gam = 0.8, dt = 1e-3;
    NormSeries norms;
    for (int i = 0; i <= 4000; ++i) {
        norms.times.push_back(i * dt);
        norms.norm_sq.push_back(std::exp(-gam * i * dt));
    }
    DetectionSeries s = build_detection_series(norms, {});
    CHECK(s.rho_normloss[2000] ==
          doctest::Approx(gam * std::exp(-gam * 2.0)).epsilon(1e-5));
    CHECK(s.cum_fraction.back() == doctest::Approx(1.0 - std::exp(-gam * 4.0)).epsilon(1e-12));
    // mu* against the closed form: int_0^T t g e^{-gt} dt + T e^{-gT}
    const double T = 4.0;
    const double want = (1.0 - std::exp(-gam * T) * (1.0 + gam * T)) / gam + T * std::exp(-gam * T);
    CHECK(s.mu_star == doctest::Approx(want).epsilon(1e-4));
}
