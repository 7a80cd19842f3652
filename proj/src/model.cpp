#include "qdt/model.hpp"

#include <cmath>

namespace qdt {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kHbarSI = 1.054571817e-34; // J s
} // namespace

std::array<double, 3> BlochSpinor::direction() const {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

DetectorModel DetectorModel::none() { return DetectorModel{}; }

DetectorModel DetectorModel::cap_tanh(double z0, double a, double Wmax, double L) {
    if (Wmax <= 0 || a <= 0 || z0 <= 0 || z0 >= L)
        throw ConfigError("detector: tanh CAP requires Wmax > 0, a > 0, 0 < z0 < L");
    DetectorModel m;
    m.kind = DetectorKind::cap;
    m.profile = CapProfile::tanh_step;
    m.z0 = z0; m.a = a; m.Wmax = Wmax; m.L = L;
    return m;
}

DetectorModel DetectorModel::cap_sharp(double z0, double Wmax, double L) {
    if (Wmax <= 0 || z0 <= 0 || z0 >= L)
        throw ConfigError("detector: sharp CAP requires Wmax > 0 and 0 < z0 < L");
    DetectorModel m;
    m.kind = DetectorKind::cap;
    m.profile = CapProfile::sharp_step;
    m.z0 = z0; m.Wmax = Wmax; m.L = L;
    return m;
}

DetectorModel DetectorModel::cap_cubic(double z0, double w, double Wmax, double L) {
    if (Wmax <= 0 || z0 <= 0 || z0 >= L || w <= 0 || w > 1)
        throw ConfigError("detector: cubic CAP requires Wmax > 0, 0 < z0 < L, 0 < w <= 1");
    DetectorModel m;
    m.kind = DetectorKind::cap;
    m.profile = CapProfile::cubic_ramp;
    m.z0 = z0; m.w = w; m.Wmax = Wmax; m.L = L;
    return m;
}

DetectorModel DetectorModel::abc_spinless(double kappa) {
    if (kappa <= 0) throw ConfigError("detector: ABC requires kappa > 0");
    DetectorModel m;
    m.kind = DetectorKind::abc_spinless;
    m.kappa = kappa;
    return m;
}

DetectorModel DetectorModel::abc_spinor(double kappa) {
    if (kappa <= 0) throw ConfigError("detector: ABC requires kappa > 0");
    DetectorModel m;
    m.kind = DetectorKind::abc_spinor;
    m.kappa = kappa;
    return m;
}

double cap_profile(double z, const DetectorModel& model) {
    if (model.kind != DetectorKind::cap)
        throw std::logic_error("cap_profile: detector is not a CAP");
    switch (model.profile) {
        case CapProfile::tanh_step:
            return (1.0 + std::tanh((z - model.z0) / model.a)) * model.Wmax / 2.0;
        case CapProfile::sharp_step:
            return (z > model.z0 && z < model.L) ? model.Wmax : 0.0;
        case CapProfile::cubic_ramp: {
            double s = (z - model.z0) / ((model.L - model.z0) * model.w);
            if (s < 0.0) s = 0.0;
            if (s > 1.0) s = 1.0;
            return s * s * s * model.Wmax;
        }
    }
    return 0.0;
}

SpinorField initial_state(const GridSpec& grid, const PhysicsConfig& physics,
                          InitialStateReport* report, bool strict) {
    if (physics.d > grid.Lz)
        throw ConfigError("initial_state: slab width d exceeds the box height");
    if (physics.mode == SpinMode::spinor && !physics.spinor)
        throw ConfigError("initial_state: spinor mode requires Bloch angles");
    if (physics.omega <= 0)
        throw ConfigError("initial_state: the transverse ground state needs omega > 0");

    const double omega = physics.omega;
    const double d = physics.d;
    const double cx = grid.Lx / 2.0, cy = grid.Ly / 2.0;

    InitialStateReport rep;
    const double sigma = std::sqrt(kHbar / (kMass * omega));
    rep.leak_warning = 6.0 * sigma > std::min(grid.Lx, grid.Ly) / 2.0;
    const double half = std::min(cx, cy);
    rep.wall_amplitude = std::exp(-kMass * omega * half * half / (2.0 * kHbar));
    if (rep.leak_warning && strict)
        throw ConfigError("initial_state: transverse Gaussian leaks beyond the lateral walls");

    SpinorField field(grid, physics.mode);
    const double amp = std::sqrt(2.0 * kMass * omega / (kPi * kHbar * d));
    auto u = field.up();
    for (int i = 0; i < grid.Nx; ++i) {
        const double gx = grid.x(i) - cx;
        for (int j = 0; j < grid.Ny; ++j) {
            const double gy = grid.y(j) - cy;
            // lateral walls are Dirichlet nodes
            const bool wall = i == 0 || i == grid.Nx - 1 || j == 0 || j == grid.Ny - 1;
            const double trans =
                wall ? 0.0
                     : amp * std::exp(-kMass * omega * (gx * gx + gy * gy) / (2.0 * kHbar));
            for (int k = 0; k < grid.Nz; ++k) {
                const double z = grid.z(k);
                const double axial = (z > 0.0 && z < d) ? std::sin(kPi * z / d) : 0.0;
                u[grid.index(i, j, k)] = trans * axial;
            }
        }
    }
    if (physics.mode == SpinMode::spinor) {
        const cplx cu = physics.spinor->up();
        const cplx cd = physics.spinor->down();
        auto dn = field.down();
        for (std::size_t l = 0; l < grid.size(); ++l) {
            dn[l] = u[l] * cd;
            u[l] *= cu;
        }
    }

    rep.raw_norm_sq = field.norm_sq();
    if (rep.raw_norm_sq <= 0.0)
        throw ConfigError("initial_state: state vanishes on this grid");
    field.scale(1.0 / std::sqrt(rep.raw_norm_sq));
    if (report) *report = rep;
    return field;
}

double si_time_unit(double d_phys, double m_phys) {
    if (d_phys <= 0 || m_phys <= 0)
        throw ConfigError("to_si: d_phys and m_phys must be positive");
    return m_phys * d_phys * d_phys / kHbarSI;
}

double to_si(double value, SiKind kind, double d_phys, double m_phys) {
    const double tstar = si_time_unit(d_phys, m_phys);
    switch (kind) {
        case SiKind::length: return value * d_phys;
        case SiKind::time: return value * tstar;
        case SiKind::frequency: return value / tstar;
        case SiKind::kappa: return value / d_phys;
    }
    throw ConfigError("to_si: unknown kind");
}

} // namespace qdt
