#pragma once

#include "qdt/config.hpp"
#include "qdt/observables.hpp"
#include "qdt/bohmian.hpp"

namespace qdt {

struct RunResult {
    DetectionSeries series;
    double final_norm_sq = 1.0;
    double detection_fraction = 0.0;
    double mu_star = 0.0;
    double mu_star_tau = 0.0;       // restricted mean of trajectory arrivals
    double max_residual = 0.0;
    double max_wall_amplitude = 0.0;
    int steps = 0;
    std::size_t arrived = 0, absorbed = 0, timed_out = 0;
    bool has_trajectories = false;
    std::vector<double> arrival_taus;
    bool complete = true;
};

// Execute one configured run and write series.csv, arrivals.csv, snapshots
// and summary.txt under cfg.out_dir.
RunResult run(const RunConfig& cfg);

struct SweepMember {
    double value = 0.0;
    RunResult result;
    std::string dir;
};

struct SqrtFit {
    double A = 0.0, B = 0.0;
    double rms_residual = 0.0;
};

// Least squares of y = A + B sqrt(x).
SqrtFit fit_sqrt_law(const std::vector<double>& x, const std::vector<double>& y);

struct SweepResult {
    std::vector<SweepMember> members;
    std::optional<SqrtFit> omega_fit; // spinor-ABC omega sweeps
};

// Run cfg once per sweep value (members under out_dir/<axis>=<value>) and
// collate mu_star / detection fractions into sweep.csv.
SweepResult sweep(const RunConfig& cfg);

struct ConvergenceRow {
    std::string axis;
    std::string base, refined;
    double mu_base = 0.0, mu_refined = 0.0;
    double eps_rel = 0.0; // |mu_base - mu_refined| / |mu_refined|
};

// Rerun the config at refined dt (x1/2), Nz (x2) and, for 3d runs, Nx=Ny
// (x1.2), reporting the relative change of mu_star per axis.
std::vector<ConvergenceRow> converge(const RunConfig& cfg);

} // namespace qdt
