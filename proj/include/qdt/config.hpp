#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdt/model.hpp"
#include "qdt/propagator.hpp"

namespace qdt {

enum class GeometryKind { box3d, line1d };

struct SiBlock {
    double d_phys = 0.0;  // meters
    double mass = 0.0;    // kilograms
};

// Fully resolved run configuration, parsed from flat sectioned key=value
// text (geometry.Lx = ..., detector.kind = ..., ...).
struct RunConfig {
    GeometryKind geometry = GeometryKind::box3d;
    double Lx = 0, Ly = 0, Lz = 0;
    int Nx = 0, Ny = 0, Nz = 0;
    // Optional transverse scaling Lx = Ly = c / sqrt(omega); keeps the
    // scaled transverse problem identical across omega sweeps.
    double transverse_over_sqrt_omega = 0.0;

    double omega = 0.0;
    double theta = 0.0, phi = 0.0;
    SpinMode spin_mode = SpinMode::scalar;

    DetectorKind detector = DetectorKind::none;
    bool free_run = false; // detector.kind = free: reference comparison run
    double kappa = 0.0;
    CapProfile profile = CapProfile::tanh_step;
    double z0 = 0.0, a = 0.0, w = 1.0, Wmax = 0.0;
    double probe_L = 0.0; // free runs: probe height (box length is Lz)
    double far_wall_threshold = 1e-10; // free runs: oracle validity gate

    SolverConfig solver;
    double t_cutoff = 0.0;
    double cfl = 0.8;
    std::size_t n_trajectories = 0;
    std::uint64_t seed = 1;
    enum class Guidance { matched, convective, pauli } guidance = Guidance::matched;
    bool freeze_pre_step = false; // guidance field frozen at psi^n instead of psi^{n+1}
    bool strict = false;

    std::string out_dir = "out";
    int bins = 200;
    int series_stride = 1;
    std::vector<double> snapshot_times;
    int trajectory_dump_stride = 0; // 0 disables the decimated dump
    int trajectory_dump_count = 20;

    std::optional<SiBlock> si;

    std::string sweep_axis;
    std::vector<double> sweep_values;
    int sweep_parallel = 1;

    // All keys as parsed (post-override), for the summary echo.
    std::map<std::string, std::string> raw;

    void validate() const;
    DetectorModel detector_model() const;
    PhysicsConfig physics() const;
    GridSpec grid() const; // box3d only
    double resolved_Lx() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::string>& overrides = {});

} // namespace qdt
