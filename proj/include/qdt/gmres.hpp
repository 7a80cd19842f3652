#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qdt/grid.hpp"

namespace qdt {

using LinearOp = std::function<void(std::span<const cplx>, std::span<cplx>)>;

struct GmresOptions {
    int restart = 30;
    int max_outer = 1000;     // restart cycles
    double rel_tol = 1e-8;
    const std::vector<cplx>* jacobi_diag = nullptr; // optional diag(A) preconditioner
};

struct GmresResult {
    bool converged = false;
    int iterations = 0;    // total inner iterations
    double residual = 0.0; // final relative residual estimate
};

// Reusable Krylov storage; basis rows are allocated on first use so cheap
// solves never touch the full restart-length basis.
struct GmresWorkspace {
    std::vector<std::vector<cplx>> basis;
    std::vector<cplx> w;
    std::vector<cplx> scratch;
};

// Deterministic dot/norm reductions (fixed block order, thread-count
// independent).
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);

// Restarted GMRES for a complex non-Hermitian system A x = b. x carries the
// initial guess on entry and the solution on exit.
GmresResult gmres(const LinearOp& apply, std::span<const cplx> b, std::span<cplx> x,
                  const GmresOptions& opts, GmresWorkspace& ws);

} // namespace qdt
