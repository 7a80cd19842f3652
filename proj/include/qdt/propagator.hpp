#pragma once

#include <functional>
#include <vector>

#include "qdt/gmres.hpp"
#include "qdt/sparse.hpp"

namespace qdt {

struct SolverConfig {
    double dt = 1e-3;
    double rel_tol = 1e-8;
    int restart = 30;
    int max_iter = 1000; // outer (restart) cycles
    bool jacobi = false;

    void validate() const;
};

// Discrete norm history ||psi_{t_n}||^2, recorded before the first step and
// after every step.
struct NormSeries {
    std::vector<double> times;
    std::vector<double> norm_sq;

    // Non-increasing up to `slack` per step.
    bool monotone(double slack) const;
};

struct StepStats {
    int iterations = 0;
    double residual = 0.0;
};

// Workspace shared across CN steps of one propagation.
class CnWorkspace {
public:
    explicit CnWorkspace(const SparseOperator& H, const SolverConfig& cfg);

    // Advance psi by one CN step: (I + i dt/2 H) psi' = (I - i dt/2 H) psi,
    // warm-started from psi. Throws SolverFailure if GMRES does not reach
    // the requested residual.
    StepStats step(std::vector<cplx>& psi);

    // State before the most recent step (valid until the next step call).
    const std::vector<cplx>& previous() const { return next_; }

    // Relative true residual ||A psi_next - rhs|| / ||rhs|| of the most
    // recent step, with rhs = B psi_prev as computed in that step.
    double verify_residual(std::span<const cplx> psi_next);

    const SolverConfig& config() const { return cfg_; }

private:
    const SparseOperator& H_;
    SolverConfig cfg_;
    std::vector<cplx> rhs_, tmp_, next_;
    std::vector<cplx> jacobi_diag_;
    GmresWorkspace gmres_ws_;

    void apply_cn(double sign, std::span<const cplx> x, std::span<cplx> y);
};

struct StepView {
    int step;         // 1-based index of the completed step
    double t_prev;    // t_n
    double t;         // t_{n+1}
    const std::vector<cplx>& prev; // psi^n
    const std::vector<cplx>& next; // psi^{n+1}
};

using StepObserver = std::function<void(const StepView&)>;

struct PropagationResult {
    NormSeries norms;
    int steps = 0;
    double max_residual = 0.0;     // max spot-checked true residual
    long total_iterations = 0;
    double volume_element = 1.0;
};

// Run floor(t_cutoff/dt) CN steps, recording the norm history and invoking
// the observers after each step. `volume_element` converts vector norms to
// the discrete L2 norm (hx hy hz, or hz for 1D problems).
PropagationResult propagate(std::vector<cplx>& psi, const SparseOperator& H,
                            const SolverConfig& cfg, double t_cutoff,
                            const std::vector<StepObserver>& observers,
                            double volume_element);

} // namespace qdt
