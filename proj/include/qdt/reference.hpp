#pragma once

#include <cstdint>
#include <optional>

#include "qdt/bohmian.hpp"
#include "qdt/observables.hpp"
#include "qdt/operators.hpp"

namespace qdt {

// z-factorized problem: the transverse directions decouple for CAP and the
// spinless ABC, so the detection statistics follow from the 1D line problem
// with the same stencils and CN scheme as the 3D solver.
struct Line1DProblem {
    int Nz = 0;
    double hz = 0.0;
    Face1D top = Face1D::dirichlet_both;
    double kappa = 0.0;                    // Robin top
    std::optional<DetectorModel> cap;      // -iW(z) diagonal
    double d = 1.0;                        // initial slab width
    SolverConfig solver;

    double Lz() const { return Nz * hz; }
};

struct Line1DResult {
    NormSeries norms;
    std::vector<double> rho_model;   // flux (Robin) or CAP-volume route, empty otherwise
    std::vector<double> probe_flux;  // j_z at the probe node, if requested
    std::vector<double> probe_mass;  // integral of |psi|^2 below the probe
    std::vector<double> wall_occupancy; // probability within one cell of the top wall
    std::vector<cplx> psi_final;
    double max_residual = 0.0;
    double max_far_wall = 0.0;       // max of wall_occupancy
};

// CN evolution of the line problem; optionally records the flux through an
// interior probe node and the mass below it.
Line1DResult evolve_1d(const Line1DProblem& problem, double t_cutoff,
                       std::optional<int> probe_node = std::nullopt);

struct RhoFreeCurve {
    std::vector<double> times;
    std::vector<double> rho_flux;     // flux route
    std::vector<double> rho_massloss; // -d/dt of the mass below the probe
    double max_far_wall = 0.0;          // over the whole run
    double max_far_wall_windowed = 0.0; // over t <= t_wall_safe (the gate)
    double t_wall_safe = 0.0;
    double box_length = 0.0;
    int probe_node = 0;
};

struct RhoFreeOptions {
    double margin_factor = 4.0; // box length = margin_factor * L
    double hz = 0.02;
    double dt = 2e-4;
    double far_wall_threshold = 1e-10;
    // Outgoing-wave truncation of the half line: a gentle cubic absorbing
    // ramp over the outer part of the box soaks up everything that passed
    // the probe, so neither wall reflections nor ramp reflections re-enter
    // the physical region. Set absorber_Wmax = 0 for a bare Dirichlet wall.
    double absorber_Wmax = 40.0;
    double absorber_start_fraction = 0.4;
    SolverConfig solver; // dt taken from `dt`
};

// Detector-free half-line evolution; rho_free(t) is the flux through the
// probe height L. Validity gate: wave content reaching the far wall B at
// time t has speed >= B/t, so its reflection cannot re-enter the probe
// before t (2B - L)/B; occupancy within one cell of the wall therefore
// matters only for t <= t_cutoff B/(2B - L). Throws OracleInvalid when that
// windowed occupancy exceeds the threshold.
RhoFreeCurve rho_free(double L, double t_cutoff, const RhoFreeOptions& opts = {});

struct FreeArrivalOptions {
    double margin_factor = 4.0;
    double hz = 0.05;
    double dt = 5e-4;
    double cfl = 0.8;
    int substeps_per_field_step = 1;
    // same outgoing-wave truncation as rho_free; the layer sits far beyond
    // the counting plane, where no live trajectory ever travels
    double absorber_Wmax = 40.0;
    double absorber_start_fraction = 0.4;
};

struct FreeArrivalResult {
    std::vector<double> tau;            // arrival times of arrived particles
    std::vector<Vec3> hit;              // crossing positions, aligned with tau
    std::size_t arrived = 0;
    std::size_t total = 0;
    double tau_max = 0.0;
    double max_far_wall = 0.0;
};

// Bohmian arrival times at z = L with no detector, for a spin-1/2 product
// state guided by the Pauli current. The field factorizes, so only the 1D
// z profile is evolved; the transverse Gaussian enters analytically.
FreeArrivalResult free_bohmian_arrivals(double L, double theta, double phi, double omega,
                                        std::size_t n, double t_cutoff, std::uint64_t seed,
                                        const FreeArrivalOptions& opts = {});

} // namespace qdt
