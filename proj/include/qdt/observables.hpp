#pragma once

#include <string>
#include <vector>

#include "qdt/model.hpp"
#include "qdt/propagator.hpp"

namespace qdt {

enum class CurrentKind { convective, pauli };

struct CurrentField {
    CurrentKind kind = CurrentKind::convective;
    std::vector<double> jx, jy, jz;
};

// j^C = (hbar/m) Im(Psi^dag grad Psi), summed over spin components.
CurrentField convective_current(const SpinorField& psi);

// j^P = j^C + (hbar/2m) curl(Psi^dag sigma Psi). Spinor mode only.
CurrentField pauli_current(const SpinorField& psi);

// Spin density S = Psi^dag sigma Psi (spinor mode).
std::array<std::vector<double>, 3> spin_density(const SpinorField& psi);

// Integral of j_z over the constant-z layer k.
double plane_flux(const GridSpec& grid, const CurrentField& j, int k);

// rho_T(t) for ABC detectors: (hbar kappa / m) * sum over the counting
// plane of |Psi|^2 hx hy.
double rho_T_flux(const SpinorField& psi, const DetectorModel& detector);

// rho_T(t) for CAP detectors: (2/hbar) * sum of W(z) |Psi|^2 over the grid.
double rho_T_capvolume(const SpinorField& psi, const DetectorModel& detector);

struct DetectionSeries {
    std::vector<double> times;
    std::vector<double> norm_sq;
    std::vector<double> rho_normloss;
    std::vector<double> rho_model;    // empty if no model-route density
    std::vector<double> cum_fraction; // 1 - norm_sq
    double detection_fraction = 0.0;  // at the final recorded time
    double mu_star = 0.0;             // restricted mean from the model route
                                      // (norm-loss route if no model series)
};

// Post-process a propagation: centered differences of ||Psi||^2 for the
// norm-loss density (one-sided at the endpoints) plus the recorded
// model-route series.
DetectionSeries build_detection_series(const NormSeries& norms,
                                       std::vector<double> rho_model);

// E[min(T, t_cutoff)] by trapezoidal quadrature of the density series.
double restricted_mean(const std::vector<double>& times, const std::vector<double>& rho,
                       double t_cutoff);

struct Histogram {
    std::vector<double> edges;   // bins + 1
    std::vector<double> height;  // density: sum(height * width) = arrived/ensemble
    std::vector<std::size_t> count;
};

// Density-normalized histogram; integrates to (#samples)/(ensemble_size).
Histogram make_histogram(const std::vector<double>& samples, int bins, double lo, double hi,
                         std::size_t ensemble_size);

void write_series_csv(const std::string& path, const DetectionSeries& s, int stride,
                      const std::string& model_tag);

} // namespace qdt
