#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdt/grid.hpp"

namespace qdt {

struct Triplet {
    std::int64_t row;
    std::int64_t col;
    cplx value;
};

// Compressed-row complex sparse matrix. Duplicate triplets are summed at
// construction; the hermitian flag records whether the assembled matrix
// equals its conjugate transpose entrywise.
class SparseOperator {
public:
    SparseOperator() = default;
    static SparseOperator from_triplets(std::size_t dim, std::vector<Triplet> triplets);

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return val_.size(); }
    bool hermitian() const { return hermitian_; }
    double max_asymmetry() const { return max_asymmetry_; }

    // y = A x
    void mul(std::span<const cplx> x, std::span<cplx> y) const;

    cplx entry(std::int64_t row, std::int64_t col) const;
    std::vector<cplx> diagonal() const;

    std::span<const std::int64_t> row_ptr() const { return row_ptr_; }
    std::span<const std::int32_t> cols() const { return col_; }
    std::span<const cplx> values() const { return val_; }

private:
    std::size_t dim_ = 0;
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::int32_t> col_;
    std::vector<cplx> val_;
    bool hermitian_ = false;
    double max_asymmetry_ = 0.0;
};

} // namespace qdt
