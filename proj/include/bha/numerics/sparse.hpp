#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace bha {

using Index = Eigen::Index;
using DenseMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Compressed sparse row storage of a symmetric matrix (both triangles stored).
///
/// Column indices are strictly increasing within each row, no explicit zeros
/// are kept, and entry (i,j) is bit-equal to entry (j,i).
class SparseSym {
public:
    SparseSym() = default;

    /// Duplicates are summed in insertion order. Throws NonSymmetric when the
    /// summed pattern or values are not symmetric.
    static SparseSym from_triplets(Index n, std::vector<Triplet> triplets);

    /// Takes ownership of CSR arrays and validates every invariant.
    static SparseSym from_csr(Index n, std::vector<Index> row_ptr, std::vector<Index> col_idx,
                              std::vector<double> values);

    static SparseSym from_dense(const DenseMat& dense);
    static SparseSym identity(Index n);

    Index size() const noexcept { return n_; }
    Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

    std::span<const Index> row_ptr() const noexcept { return row_ptr_; }
    std::span<const Index> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> row_cols(Index i) const;
    std::span<const double> row_values(Index i) const;

    /// Zero for entries outside the pattern.
    double coeff(Index i, Index j) const;

    Vec multiply(const Vec& x) const;
    DenseMat multiply(const DenseMat& x) const;

    double trace() const;
    double frobenius_norm() const;

    /// Pattern transpose equality and exact value symmetry.
    bool is_symmetric() const;

    DenseMat to_dense() const;
    Eigen::SparseMatrix<double> to_eigen() const;

private:
    Index n_ = 0;
    std::vector<Index> row_ptr_{0};
    std::vector<Index> col_idx_;
    std::vector<double> values_;
};

/// Compressed sparse column storage of a rectangular matrix, built column by column.
class SparseRect {
public:
    SparseRect() = default;
    SparseRect(Index rows, Index cols, Index reserve_nnz = 0);

    /// Appends the next column. Row indices must be strictly increasing.
    void append_column(std::span<const Index> rows, std::span<const double> values);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index filled_columns() const noexcept { return static_cast<Index>(col_ptr_.size()) - 1; }
    Index nnz() const noexcept { return static_cast<Index>(values_.size()); }
    Index max_column_nnz() const;

    std::span<const Index> col_ptr() const noexcept { return col_ptr_; }
    std::span<const Index> row_idx() const noexcept { return row_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> column_rows(Index j) const;
    std::span<const double> column_values(Index j) const;

    /// y = A x
    Vec multiply(const Vec& x) const;
    /// y = A^T x
    Vec multiply_transpose(const Vec& x) const;

    DenseMat to_dense() const;

    static SparseRect from_dense(const DenseMat& dense);

    bool operator==(const SparseRect&) const = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> col_ptr_{0};
    std::vector<Index> row_idx_;
    std::vector<double> values_;
};

} // namespace bha
