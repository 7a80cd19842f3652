#include "qdt/propagator.hpp"

#include <cmath>

namespace qdt {

void SolverConfig::validate() const {
    if (dt <= 0) throw ConfigError("solver: dt must be positive");
    if (rel_tol <= 0 || rel_tol >= 1) throw ConfigError("solver: rel_tol must be in (0,1)");
    if (restart < 2) throw ConfigError("solver: restart must be >= 2");
    if (max_iter < 1) throw ConfigError("solver: max_iter must be >= 1");
}

bool NormSeries::monotone(double slack) const {
    for (std::size_t i = 1; i < norm_sq.size(); ++i)
        if (norm_sq[i] > norm_sq[i - 1] + slack) return false;
    return true;
}

CnWorkspace::CnWorkspace(const SparseOperator& H, const SolverConfig& cfg)
    : H_(H), cfg_(cfg), rhs_(H.dim()), tmp_(H.dim()), next_(H.dim()) {
    cfg_.validate();
    if (cfg_.jacobi) {
        const auto hdiag = H_.diagonal();
        jacobi_diag_.resize(H_.dim());
        const cplx itau(0.0, cfg_.dt / 2.0);
        for (std::size_t i = 0; i < H_.dim(); ++i)
            jacobi_diag_[i] = cplx(1.0, 0.0) + itau * hdiag[i];
    }
}

void CnWorkspace::apply_cn(double sign, std::span<const cplx> x, std::span<cplx> y) {
    // y = (I + sign * i dt/2 H) x
    H_.mul(x, y);
    const cplx itau(0.0, sign * cfg_.dt / 2.0);
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + itau * y[i];
}

StepStats CnWorkspace::step(std::vector<cplx>& psi) {
    apply_cn(-1.0, psi, rhs_);
    next_ = psi; // warm start
    GmresOptions opts;
    opts.restart = cfg_.restart;
    opts.max_outer = cfg_.max_iter;
    opts.rel_tol = cfg_.rel_tol;
    opts.jacobi_diag = jacobi_diag_.empty() ? nullptr : &jacobi_diag_;
    auto apply = [this](std::span<const cplx> x, std::span<cplx> y) { apply_cn(1.0, x, y); };
    const GmresResult res = gmres(apply, rhs_, next_, opts, gmres_ws_);
    if (!res.converged)
        throw SolverFailure("cn_step: GMRES stalled at relative residual " +
                                std::to_string(res.residual),
                            res.residual);
    psi.swap(next_);
    return {res.iterations, res.residual};
}

double CnWorkspace::verify_residual(std::span<const cplx> psi_next) {
    apply_cn(1.0, psi_next, tmp_);
    for (std::size_t i = 0; i < tmp_.size(); ++i) tmp_[i] -= rhs_[i];
    const double bn = norm2(rhs_);
    return bn > 0 ? norm2(tmp_) / bn : 0.0;
}

PropagationResult propagate(std::vector<cplx>& psi, const SparseOperator& H,
                            const SolverConfig& cfg, double t_cutoff,
                            const std::vector<StepObserver>& observers,
                            double volume_element) {
    if (t_cutoff <= 0) throw ConfigError("propagate: t_cutoff must be positive");
    if (psi.size() != H.dim())
        throw ConfigError("propagate: state and operator dimensions disagree");

    CnWorkspace ws(H, cfg);
    const int nsteps = int(std::floor(t_cutoff / cfg.dt + 1e-9));

    PropagationResult out;
    out.volume_element = volume_element;
    out.norms.times.reserve(std::size_t(nsteps) + 1);
    out.norms.norm_sq.reserve(std::size_t(nsteps) + 1);

    auto record = [&](double t) {
        const double nrm = norm2(psi);
        out.norms.times.push_back(t);
        out.norms.norm_sq.push_back(nrm * nrm * volume_element);
    };
    record(0.0);

    for (int n = 0; n < nsteps; ++n) {
        StepStats st;
        try {
            st = ws.step(psi);
        } catch (const SolverFailure&) {
            out.steps = n;
            throw;
        }
        out.total_iterations += st.iterations;
        const double t0 = n * cfg.dt, t1 = (n + 1) * cfg.dt;
        record(t1);
        if ((n + 1) % 100 == 0 || n + 1 == nsteps) {
            const double r = ws.verify_residual(psi);
            out.max_residual = std::max(out.max_residual, r);
            if (r > 10.0 * cfg.rel_tol)
                throw SolverFailure("propagate: spot-checked residual exceeds tolerance", r);
        } else {
            out.max_residual = std::max(out.max_residual, st.residual);
        }
        if (!observers.empty()) {
            StepView view{n + 1, t0, t1, ws.previous(), psi};
            for (const auto& obs : observers) obs(view);
        }
        out.steps = n + 1;
    }
    return out;
}

} // namespace qdt
