#include "bha/numerics/sparse.hpp"

#include "bha/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

namespace bha {

SparseSym SparseSym::from_triplets(Index n, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw DimensionMismatch("triplet index out of range");
    }
    // Stable so duplicates are summed in insertion order; mirrored pairs then
    // accumulate identical sequences and stay bit-equal.
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<Index> row_ptr(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> col_idx;
    std::vector<double> values;
    col_idx.reserve(triplets.size());
    values.reserve(triplets.size());

    std::size_t k = 0;
    for (Index i = 0; i < n; ++i) {
        while (k < triplets.size() && triplets[k].row == i) {
            const Index j = triplets[k].col;
            double sum = 0.0;
            while (k < triplets.size() && triplets[k].row == i && triplets[k].col == j)
                sum += triplets[k++].value;
            if (sum != 0.0) {
                col_idx.push_back(j);
                values.push_back(sum);
            }
        }
        row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<Index>(col_idx.size());
    }
    return from_csr(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseSym SparseSym::from_csr(Index n, std::vector<Index> row_ptr, std::vector<Index> col_idx,
                              std::vector<double> values) {
    if (n < 0 || row_ptr.size() != static_cast<std::size_t>(n) + 1 || row_ptr.front() != 0 ||
        row_ptr.back() != static_cast<Index>(col_idx.size()) || col_idx.size() != values.size())
        throw DimensionMismatch("inconsistent CSR arrays");
    for (Index i = 0; i < n; ++i) {
        for (Index k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            if (col_idx[k] < 0 || col_idx[k] >= n)
                throw DimensionMismatch("column index out of range");
            if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1])
                throw DimensionMismatch("column indices not strictly increasing in row " +
                                        std::to_string(i));
            if (values[k] == 0.0)
                throw DimensionMismatch("explicit zero stored");
        }
    }
    SparseSym m;
    m.n_ = n;
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    if (!m.is_symmetric())
        throw NonSymmetric("sparse matrix is not symmetric");
    return m;
}

SparseSym SparseSym::from_dense(const DenseMat& dense) {
    if (dense.rows() != dense.cols())
        throw DimensionMismatch("dense matrix is not square");
    std::vector<Triplet> t;
    for (Index i = 0; i < dense.rows(); ++i)
        for (Index j = 0; j < dense.cols(); ++j)
            if (dense(i, j) != 0.0)
                t.push_back({i, j, dense(i, j)});
    return from_triplets(dense.rows(), std::move(t));
}

SparseSym SparseSym::identity(Index n) {
    std::vector<Index> rp(static_cast<std::size_t>(n) + 1);
    std::iota(rp.begin(), rp.end(), Index{0});
    std::vector<Index> ci(static_cast<std::size_t>(n));
    std::iota(ci.begin(), ci.end(), Index{0});
    return from_csr(n, std::move(rp), std::move(ci), std::vector<double>(n, 1.0));
}

std::span<const Index> SparseSym::row_cols(Index i) const {
    return std::span<const Index>(col_idx_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

std::span<const double> SparseSym::row_values(Index i) const {
    return std::span<const double>(values_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

double SparseSym::coeff(Index i, Index j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j)
        return 0.0;
    return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
}

Vec SparseSym::multiply(const Vec& x) const {
    if (x.size() != n_)
        throw DimensionMismatch("SparseSym::multiply size mismatch");
    Vec y(n_);
    for (Index i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            acc += values_[k] * x[col_idx_[k]];
        y[i] = acc;
    }
    return y;
}

DenseMat SparseSym::multiply(const DenseMat& x) const {
    if (x.rows() != n_)
        throw DimensionMismatch("SparseSym::multiply size mismatch");
    DenseMat y = DenseMat::Zero(n_, x.cols());
    for (Index c = 0; c < x.cols(); ++c)
        y.col(c) = multiply(Vec(x.col(c)));
    return y;
}

double SparseSym::trace() const {
    double t = 0.0;
    for (Index i = 0; i < n_; ++i)
        t += coeff(i, i);
    return t;
}

double SparseSym::frobenius_norm() const {
    double s = 0.0;
    for (double v : values_)
        s += v * v;
    return std::sqrt(s);
}

bool SparseSym::is_symmetric() const {
    for (Index i = 0; i < n_; ++i) {
        const auto cols = row_cols(i);
        const auto vals = row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const Index j = cols[k];
            const auto mirror = row_cols(j);
            const auto it = std::lower_bound(mirror.begin(), mirror.end(), i);
            if (it == mirror.end() || *it != i)
                return false;
            if (row_values(j)[static_cast<std::size_t>(it - mirror.begin())] != vals[k])
                return false;
        }
    }
    return true;
}

DenseMat SparseSym::to_dense() const {
    DenseMat d = DenseMat::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            d(i, col_idx_[k]) = values_[k];
    return d;
}

Eigen::SparseMatrix<double> SparseSym::to_eigen() const {
    // CSR of a symmetric matrix is the CSC of the same matrix.
    Eigen::SparseMatrix<double> m(n_, n_);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (Index i = 0; i < n_; ++i)
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            t.emplace_back(col_idx_[k], i, values_[k]);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

SparseRect::SparseRect(Index rows, Index cols, Index reserve_nnz) : rows_(rows), cols_(cols) {
    col_ptr_.reserve(static_cast<std::size_t>(cols) + 1);
    row_idx_.reserve(static_cast<std::size_t>(reserve_nnz));
    values_.reserve(static_cast<std::size_t>(reserve_nnz));
}

void SparseRect::append_column(std::span<const Index> rows, std::span<const double> values) {
    if (filled_columns() >= cols_)
        throw DimensionMismatch("SparseRect: too many columns appended");
    if (rows.size() != values.size())
        throw DimensionMismatch("SparseRect: rows/values length mismatch");
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] < 0 || rows[k] >= rows_)
            throw DimensionMismatch("SparseRect: row index out of range");
        if (k > 0 && rows[k] <= rows[k - 1])
            throw DimensionMismatch("SparseRect: row indices not strictly increasing");
    }
    row_idx_.insert(row_idx_.end(), rows.begin(), rows.end());
    values_.insert(values_.end(), values.begin(), values.end());
    col_ptr_.push_back(static_cast<Index>(row_idx_.size()));
}

Index SparseRect::max_column_nnz() const {
    Index best = 0;
    for (std::size_t j = 0; j + 1 < col_ptr_.size(); ++j)
        best = std::max(best, col_ptr_[j + 1] - col_ptr_[j]);
    return best;
}

std::span<const Index> SparseRect::column_rows(Index j) const {
    return std::span<const Index>(row_idx_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
}

std::span<const double> SparseRect::column_values(Index j) const {
    return std::span<const double>(values_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
}

Vec SparseRect::multiply(const Vec& x) const {
    if (x.size() != cols_)
        throw DimensionMismatch("SparseRect::multiply size mismatch");
    Vec y = Vec::Zero(rows_);
    for (Index j = 0; j < filled_columns(); ++j) {
        const double xj = x[j];
        if (xj == 0.0)
            continue;
        for (Index k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
            y[row_idx_[k]] += values_[k] * xj;
    }
    return y;
}

Vec SparseRect::multiply_transpose(const Vec& x) const {
    if (x.size() != rows_)
        throw DimensionMismatch("SparseRect::multiply_transpose size mismatch");
    Vec y = Vec::Zero(cols_);
    for (Index j = 0; j < filled_columns(); ++j) {
        double acc = 0.0;
        for (Index k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
            acc += values_[k] * x[row_idx_[k]];
        y[j] = acc;
    }
    return y;
}

DenseMat SparseRect::to_dense() const {
    DenseMat d = DenseMat::Zero(rows_, cols_);
    for (Index j = 0; j < filled_columns(); ++j)
        for (Index k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
            d(row_idx_[k], j) = values_[k];
    return d;
}

SparseRect SparseRect::from_dense(const DenseMat& dense) {
    SparseRect r(dense.rows(), dense.cols());
    std::vector<Index> rows;
    std::vector<double> vals;
    for (Index j = 0; j < dense.cols(); ++j) {
        rows.clear();
        vals.clear();
        for (Index i = 0; i < dense.rows(); ++i) {
            if (dense(i, j) != 0.0) {
                rows.push_back(i);
                vals.push_back(dense(i, j));
            }
        }
        r.append_column(rows, vals);
    }
    return r;
}

} // namespace bha
