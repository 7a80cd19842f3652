#include "qdt/gmres.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qdt {

namespace {
constexpr std::size_t kBlock = 4096;
// below this size the parallel-region overhead dominates
constexpr std::size_t kOmpMin = 16384;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    const std::size_t n = a.size();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<cplx> partial(nblocks);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n >= kOmpMin)
#endif
    for (std::int64_t blk = 0; blk < std::int64_t(nblocks); ++blk) {
        const std::size_t lo = std::size_t(blk) * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n);
        cplx s(0.0, 0.0);
        for (std::size_t i = lo; i < hi; ++i) s += std::conj(a[i]) * b[i];
        partial[std::size_t(blk)] = s;
    }
    cplx total(0.0, 0.0);
    for (const cplx& p : partial) total += p;
    return total;
}

double norm2(std::span<const cplx> a) {
    const std::size_t n = a.size();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n >= kOmpMin)
#endif
    for (std::int64_t blk = 0; blk < std::int64_t(nblocks); ++blk) {
        const std::size_t lo = std::size_t(blk) * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += std::norm(a[i]);
        partial[std::size_t(blk)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return std::sqrt(total);
}

namespace {

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
    const std::int64_t n = std::int64_t(x.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (std::size_t(n) >= kOmpMin)
#endif
    for (std::int64_t i = 0; i < n; ++i) y[std::size_t(i)] += alpha * x[std::size_t(i)];
}

} // namespace

GmresResult gmres(const LinearOp& apply, std::span<const cplx> b, std::span<cplx> x,
                  const GmresOptions& opts, GmresWorkspace& ws) {
    const std::size_t n = b.size();
    const int m = opts.restart;
    const double bnorm = norm2(b);
    GmresResult result;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), cplx(0.0, 0.0));
        result.converged = true;
        return result;
    }

    if (ws.basis.size() < std::size_t(m) + 1) ws.basis.resize(std::size_t(m) + 1);
    ws.w.resize(n);
    const std::vector<cplx>* D = opts.jacobi_diag;
    if (D) ws.scratch.resize(n);
    auto row = [&](int i) -> std::vector<cplx>& {
        auto& v = ws.basis[std::size_t(i)];
        if (v.size() != n) v.resize(n);
        return v;
    };

    // Right preconditioning: solve (A D^-1) u = b, then x = D^-1 u. The
    // initial residual of the preconditioned system equals the true one.
    auto apply_prec = [&](std::span<const cplx> v, std::span<cplx> out) {
        if (!D) {
            apply(v, out);
            return;
        }
        for (std::size_t i = 0; i < n; ++i) ws.scratch[i] = v[i] / (*D)[i];
        apply(ws.scratch, out);
    };

    std::vector<cplx> H(std::size_t(m + 1) * m, cplx(0, 0));
    std::vector<cplx> cs(m), sn(m), g(std::size_t(m) + 1);
    std::span<cplx> w(ws.w);

    double rel_res = 1.0;
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        apply(x, w);
        for (std::size_t i = 0; i < n; ++i) w[i] = b[i] - w[i];
        const double beta = norm2(w);
        rel_res = beta / bnorm;
        result.residual = rel_res;
        if (rel_res <= opts.rel_tol) {
            result.converged = true;
            return result;
        }

        auto& v0 = row(0);
        const double inv_beta = 1.0 / beta;
        for (std::size_t i = 0; i < n; ++i) v0[i] = w[i] * inv_beta;
        std::fill(g.begin(), g.end(), cplx(0, 0));
        g[0] = beta;

        int j = 0;
        for (; j < m; ++j) {
            apply_prec(row(j), w);
            // modified Gram-Schmidt
            for (int i = 0; i <= j; ++i) {
                const cplx hij = dot(row(i), w);
                H[std::size_t(i) * m + j] = hij;
                axpy(-hij, row(i), w);
            }
            const double hnext = norm2(w);
            ++result.iterations;

            for (int i = 0; i < j; ++i) {
                const cplx t = H[std::size_t(i) * m + j];
                const cplx t1 = H[std::size_t(i + 1) * m + j];
                H[std::size_t(i) * m + j] = std::conj(cs[i]) * t + std::conj(sn[i]) * t1;
                H[std::size_t(i + 1) * m + j] = -sn[i] * t + cs[i] * t1;
            }
            const cplx hjj = H[std::size_t(j) * m + j];
            const double denom = std::sqrt(std::norm(hjj) + hnext * hnext);
            if (denom == 0.0) { // zero column: nothing further to extract
                H[std::size_t(j) * m + j] = 1.0;
                g[std::size_t(j)] = 0.0;
                ++j;
                break;
            }
            cs[j] = hjj / denom;
            sn[j] = hnext / denom;
            H[std::size_t(j) * m + j] = denom;
            g[std::size_t(j) + 1] = -sn[j] * g[std::size_t(j)];
            g[std::size_t(j)] = std::conj(cs[j]) * g[std::size_t(j)];

            rel_res = std::abs(g[std::size_t(j) + 1]) / bnorm;
            if (hnext > 0.0 && j + 1 < m) {
                auto& vn = row(j + 1);
                const double inv_h = 1.0 / hnext;
                for (std::size_t i = 0; i < n; ++i) vn[i] = w[i] * inv_h;
            }
            if (rel_res <= opts.rel_tol || hnext == 0.0) {
                ++j;
                break;
            }
        }

        // back substitution on the rotated (upper-triangular) H
        std::vector<cplx> y(static_cast<std::size_t>(j));
        for (int i = j - 1; i >= 0; --i) {
            cplx s = g[std::size_t(i)];
            for (int l = i + 1; l < j; ++l) s -= H[std::size_t(i) * m + l] * y[std::size_t(l)];
            y[std::size_t(i)] = s / H[std::size_t(i) * m + i];
        }
        std::fill(w.begin(), w.end(), cplx(0, 0));
        for (int i = 0; i < j; ++i) axpy(y[std::size_t(i)], row(i), w);
        if (D)
            for (std::size_t i = 0; i < n; ++i) x[i] += w[i] / (*D)[i];
        else
            axpy(cplx(1.0, 0.0), w, x);

        result.residual = rel_res;
        if (rel_res <= opts.rel_tol) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

} // namespace qdt
