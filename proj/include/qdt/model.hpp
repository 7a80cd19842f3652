#pragma once

#include <array>
#include <optional>

#include "qdt/grid.hpp"

namespace qdt {

// Internal units fix hbar = m = d = 1; SI conversion happens only at the
// I/O boundary (to_si below).
inline constexpr double kHbar = 1.0;
inline constexpr double kMass = 1.0;

// Constant unit spinor (cos(theta/2), sin(theta/2) e^{i phi}).
struct BlochSpinor {
    double theta = 0.0; // [0, pi]
    double phi = 0.0;   // [0, 2 pi)

    cplx up() const { return std::cos(theta / 2.0); }
    cplx down() const { return std::sin(theta / 2.0) * std::polar(1.0, phi); }
    // <chi|sigma|chi>, the Bloch direction vector.
    std::array<double, 3> direction() const;
};

enum class DetectorKind { none, cap, abc_spinless, abc_spinor };
enum class CapProfile { tanh_step, sharp_step, cubic_ramp };

struct DetectorModel {
    DetectorKind kind = DetectorKind::none;
    double kappa = 0.0; // ABC kinds, inverse length
    CapProfile profile = CapProfile::tanh_step;
    double z0 = 0.0;
    double a = 0.0;    // tanh smoothing width
    double w = 1.0;    // cubic ramp width in units of (L - z0)
    double Wmax = 0.0;
    double L = 0.0;    // box height, upper end of the absorbing layer

    static DetectorModel none();
    static DetectorModel cap_tanh(double z0, double a, double Wmax, double L);
    static DetectorModel cap_sharp(double z0, double Wmax, double L);
    static DetectorModel cap_cubic(double z0, double w, double Wmax, double L);
    static DetectorModel abc_spinless(double kappa);
    static DetectorModel abc_spinor(double kappa);

    bool is_cap() const { return kind == DetectorKind::cap; }
    bool is_abc() const {
        return kind == DetectorKind::abc_spinless || kind == DetectorKind::abc_spinor;
    }
};

// Absorption strength W(z) >= 0 for CAP detectors.
double cap_profile(double z, const DetectorModel& model);

struct PhysicsConfig {
    double omega = 0.0;                // trap angular frequency
    double L = 0.0;                    // detector distance (= Lz)
    double d = 1.0;                    // initial slab width (internal unit)
    SpinMode mode = SpinMode::scalar;
    std::optional<BlochSpinor> spinor; // required in spinor mode
};

struct InitialStateReport {
    // Relative transverse Gaussian amplitude at the lateral walls; large
    // values mean the box is too narrow for the chosen omega.
    double wall_amplitude = 0.0;
    bool leak_warning = false;
    // Discrete norm before renormalization (continuum value is 1).
    double raw_norm_sq = 0.0;
};

// Transverse harmonic ground state times the slab ground state sin(pi z/d)
// on 0 < z < d, centered at (Lx/2, Ly/2), renormalized to unit discrete
// norm. In spinor mode the field is the product with the Bloch spinor.
SpinorField initial_state(const GridSpec& grid, const PhysicsConfig& physics,
                          InitialStateReport* report = nullptr, bool strict = false);

enum class SiKind { length, time, frequency, kappa };

// Translate a dimensionless quantity into SI via the slab width d_phys [m]
// and particle mass m_phys [kg]. The time unit is T* = m d^2 / hbar.
double to_si(double value, SiKind kind, double d_phys, double m_phys);
double si_time_unit(double d_phys, double m_phys);

} // namespace qdt
