#include <doctest.h>

#include <cmath>
#include <random>

#include "qdt/model.hpp"

using namespace qdt;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("bloch spinor has unit norm and the right direction") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0, 1);
    for (int rep = 0; rep < 200; ++rep) {
        const double theta = kPi * U(rng);
        const double phi = 2 * kPi * U(rng) * 0.9999;
        BlochSpinor chi{theta, phi};
        CHECK(std::norm(chi.up()) + std::norm(chi.down()) == doctest::Approx(1.0).epsilon(1e-15));

        // <chi|sigma|chi> against the spherical direction, componentwise
        const cplx u = chi.up(), d = chi.down();
        const cplx cross = std::conj(u) * d;
        const double sx = 2 * cross.real();
        const double sy = 2 * cross.imag();
        const double sz = std::norm(u) - std::norm(d);
        const auto dir = chi.direction();
        CHECK(sx == doctest::Approx(dir[0]).epsilon(1e-12));
        CHECK(sy == doctest::Approx(dir[1]).epsilon(1e-12));
        CHECK(sz == doctest::Approx(dir[2]).epsilon(1e-12));
    }
}

TEST_CASE("cap profile shapes") {
    DetectorModel tanh_cap = DetectorModel::cap_tanh(10.0, 0.165, 40.0, 11.0);
    CHECK(cap_profile(10.0, tanh_cap) == doctest::Approx(20.0));

    DetectorModel cubic = DetectorModel::cap_cubic(10.0, 0.5, 40.0, 11.0);
    // saturates at z >= z0 + w (L - z0)
    CHECK(cap_profile(10.5, cubic) == doctest::Approx(40.0));
    CHECK(cap_profile(10.9, cubic) == doctest::Approx(40.0));
    // half-way up the ramp: (1/2)^3
    CHECK(cap_profile(10.25, cubic) == doctest::Approx(5.0));
    CHECK(cap_profile(9.0, cubic) == doctest::Approx(0.0));

    DetectorModel sharp = DetectorModel::cap_sharp(10.0, 40.0, 11.0);
    CHECK(cap_profile(10.5, sharp) == doctest::Approx(40.0));
    CHECK(cap_profile(9.99, sharp) == doctest::Approx(0.0));

    // W >= 0 everywhere
    for (double z = 0; z < 11; z += 0.05) {
        CHECK(cap_profile(z, tanh_cap) >= 0.0);
        CHECK(cap_profile(z, cubic) >= 0.0);
        CHECK(cap_profile(z, sharp) >= 0.0);
    }
}

TEST_CASE("narrow cubic ramp converges pointwise to the sharp step") {
    DetectorModel sharp = DetectorModel::cap_sharp(10.0, 40.0, 11.0);
    DetectorModel narrow = DetectorModel::cap_cubic(10.0, 1e-4, 40.0, 11.0);
    for (double z : {9.5, 9.99, 10.01, 10.5, 10.99}) {
        if (std::abs(z - 10.0) < 1e-3) continue; // pointwise away from z0
        CHECK(cap_profile(z, narrow) == doctest::Approx(cap_profile(z, sharp)).epsilon(1e-9));
    }
}

TEST_CASE("initial state support, spin factor, and normalization") {
    GridSpec g = GridSpec::make(4, 4, 6, 24, 24, 60);
    PhysicsConfig phys;
    phys.omega = 4.0;
    phys.L = 6.0;
    phys.mode = SpinMode::spinor;
    phys.spinor = BlochSpinor{0.0, 0.0};

    SpinorField f = initial_state(g, phys);
    CHECK(f.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));

    // z > d: zero amplitude
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j)
            CHECK(std::abs(f.up()[g.index(i, j, 30)]) == 0.0); // z = 3 > d = 1

    // theta = 0: down component identically zero
    for (const cplx& v : f.down()) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("initial state raw norm approaches 1 under refinement") {
    PhysicsConfig phys;
    phys.omega = 2.0;
    phys.L = 4.0;
    phys.mode = SpinMode::scalar;

    auto raw_err = [&](int n) {
        GridSpec g = GridSpec::make(6, 6, 4, n, n, n);
        InitialStateReport rep;
        (void)initial_state(g, phys, &rep);
        return std::abs(rep.raw_norm_sq - 1.0);
    };
    const double e1 = raw_err(24);
    const double e2 = raw_err(48);
    CHECK(e1 < 0.05);
    CHECK(e2 < e1); // quadrature error shrinks under refinement
}

TEST_CASE("initial state transverse moment shrinks with omega") {
    GridSpec g = GridSpec::make(6, 6, 4, 40, 40, 16);
    auto second_moment = [&](double omega) {
        PhysicsConfig phys;
        phys.omega = omega;
        phys.L = 4.0;
        SpinorField f = initial_state(g, phys);
        double m = 0.0;
        for (int i = 0; i < g.Nx; ++i)
            for (int j = 0; j < g.Ny; ++j)
                for (int k = 0; k < g.Nz; ++k) {
                    const double dx = g.x(i) - 3.0, dy = g.y(j) - 3.0;
                    m += (dx * dx + dy * dy) * std::norm(f.up()[g.index(i, j, k)]);
                }
        return m * g.cell_volume();
    };
    CHECK(second_moment(8.0) < second_moment(2.0));
}

TEST_CASE("initial state leak handling") {
    GridSpec g = GridSpec::make(1.0, 1.0, 4, 8, 8, 16); // narrow box
    PhysicsConfig phys;
    phys.omega = 1.0; // sigma = 1, 6 sigma >> half box
    phys.L = 4.0;
    InitialStateReport rep;
    (void)initial_state(g, phys, &rep, false);
    CHECK(rep.leak_warning);
    CHECK_THROWS_AS((void)initial_state(g, phys, nullptr, true), ConfigError);
}

TEST_CASE("SI translation") {
    const double rb87 = 1.44316e-25; // kg
    const double d_phys = 2e-6;      // m

    const double tstar = si_time_unit(d_phys, rb87);
    CHECK(tstar == doctest::Approx(5.47e-3).epsilon(0.005));
    CHECK(to_si(1.0, SiKind::time, d_phys, rb87) == doctest::Approx(tstar));
    CHECK(to_si(5.921, SiKind::time, d_phys, rb87) == doctest::Approx(32.4e-3).epsilon(0.005));

    CHECK(to_si(3.5, SiKind::length, d_phys, rb87) == doctest::Approx(7e-6));
    CHECK(to_si(kPi, SiKind::kappa, d_phys, rb87) == doctest::Approx(kPi / d_phys));
    CHECK(to_si(100.0, SiKind::frequency, d_phys, rb87) == doctest::Approx(100.0 / tstar));
    CHECK_THROWS_AS((void)to_si(1.0, SiKind::time, -1.0, rb87), ConfigError);
}
