#include "qdt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qdt {

SparseOperator SparseOperator::from_triplets(std::size_t dim, std::vector<Triplet> t) {
    for (const Triplet& e : t)
        if (e.row < 0 || e.col < 0 || std::size_t(e.row) >= dim || std::size_t(e.col) >= dim)
            throw std::out_of_range("sparse: triplet index out of range");

    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseOperator A;
    A.dim_ = dim;
    A.row_ptr_.assign(dim + 1, 0);
    A.col_.reserve(t.size());
    A.val_.reserve(t.size());

    std::size_t i = 0;
    while (i < t.size()) {
        std::int64_t r = t[i].row, c = t[i].col;
        cplx v = t[i].value;
        ++i;
        while (i < t.size() && t[i].row == r && t[i].col == c) {
            v += t[i].value;
            ++i;
        }
        if (v != cplx(0.0, 0.0)) {
            A.col_.push_back(std::int32_t(c));
            A.val_.push_back(v);
            A.row_ptr_[std::size_t(r) + 1]++;
        }
    }
    for (std::size_t r = 0; r < dim; ++r) A.row_ptr_[r + 1] += A.row_ptr_[r];

    // Entrywise comparison against the conjugate transpose.
    std::vector<std::size_t> order(A.val_.size());
    for (std::size_t m = 0; m < order.size(); ++m) order[m] = m;
    std::vector<std::int32_t> rows(A.val_.size());
    for (std::size_t r = 0; r < dim; ++r)
        for (std::int64_t m = A.row_ptr_[r]; m < A.row_ptr_[r + 1]; ++m)
            rows[std::size_t(m)] = std::int32_t(r);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return A.col_[a] != A.col_[b] ? A.col_[a] < A.col_[b] : rows[a] < rows[b];
    });
    double asym = 0.0;
    std::size_t p = 0; // walks (row, col) order while order[] walks (col, row)
    for (std::size_t r = 0; r < dim && p < order.size(); ++r) {
        for (std::int64_t m = A.row_ptr_[r]; m < A.row_ptr_[r + 1]; ++m, ++p) {
            const std::size_t q = order[p];
            if (rows[q] != A.col_[std::size_t(m)] || A.col_[q] != std::int32_t(r)) {
                asym = std::numeric_limits<double>::infinity(); // structural mismatch
                p = order.size();
                break;
            }
            asym = std::max(asym, std::abs(A.val_[std::size_t(m)] - std::conj(A.val_[q])));
        }
    }
    A.max_asymmetry_ = asym;
    A.hermitian_ = asym <= 1e-14;
    return A;
}

void SparseOperator::mul(std::span<const cplx> x, std::span<cplx> y) const {
    if (x.size() != dim_ || y.size() != dim_)
        throw std::invalid_argument("sparse: vector size does not match dimension");
    const std::int64_t n = std::int64_t(dim_);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (dim_ >= 16384)
#endif
    for (std::int64_t r = 0; r < n; ++r) {
        cplx acc(0.0, 0.0);
        for (std::int64_t m = row_ptr_[std::size_t(r)]; m < row_ptr_[std::size_t(r) + 1]; ++m)
            acc += val_[std::size_t(m)] * x[std::size_t(col_[std::size_t(m)])];
        y[std::size_t(r)] = acc;
    }
}

cplx SparseOperator::entry(std::int64_t row, std::int64_t col) const {
    for (std::int64_t m = row_ptr_[std::size_t(row)]; m < row_ptr_[std::size_t(row) + 1]; ++m)
        if (col_[std::size_t(m)] == col) return val_[std::size_t(m)];
    return {0.0, 0.0};
}

std::vector<cplx> SparseOperator::diagonal() const {
    std::vector<cplx> d(dim_, cplx(0.0, 0.0));
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::int64_t m = row_ptr_[r]; m < row_ptr_[r + 1]; ++m)
            if (col_[std::size_t(m)] == std::int32_t(r)) d[r] = val_[std::size_t(m)];
    return d;
}

} // namespace qdt
