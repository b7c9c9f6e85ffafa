#pragma once

#include "bha/numerics/sparse.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>

namespace bha {

enum class SolveMethod { cholesky, conjugate_gradient };

struct SolveConfig {
    SolveMethod method = SolveMethod::cholesky;
    double rel_residual_tol = 1e-8;
    /// Defaults to 10 * n when unset.
    std::optional<Index> max_iters;
    /// Diagonal shift used on the retry after a failed factorization. Zero
    /// selects 1e-9 * trace(A) / n.
    double regularization = 0.0;
    /// Worker count for independent right-hand sides; 0 = all cores.
    unsigned threads = 1;

    void validate() const;
};

struct SolveReport {
    bool regularized = false;
    double shift = 0.0;
    /// Largest per-column relative residual ||A x - b|| / ||b||.
    double max_rel_residual = 0.0;
    /// CG iterations or refinement sweeps, maximum over columns.
    Index max_iterations = 0;
    /// Seconds spent keeping the top entries of each column (sparse
    /// interpolation only).
    double threshold_seconds = 0.0;
};

/// Factorizes (or prepares CG for) a symmetric positive definite sparse
/// matrix once and solves any number of right-hand sides against it.
///
/// Columns are solved independently, so a column's result does not depend
/// on which other columns share the call or on the thread count.
class SpdSolver {
public:
    SpdSolver(const SparseSym& a, SolveConfig cfg);
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    Index size() const noexcept { return n_; }
    const SolveConfig& config() const noexcept { return cfg_; }
    bool regularized() const noexcept { return shift_ != 0.0; }
    double shift() const noexcept { return shift_; }

    Vec solve(const Vec& b, Index* iterations = nullptr) const;
    DenseMat solve(const DenseMat& b, SolveReport* report = nullptr) const;
    DenseMat solve(const SparseRect& b, SolveReport* report = nullptr) const;

private:
    Vec solve_cholesky(const Vec& b, Index* iterations) const;
    Vec solve_cg(const Vec& b, Index* iterations) const;

    using Factor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                         Eigen::AMDOrdering<int>>;

    const SparseSym* a_;
    SolveConfig cfg_;
    Index n_ = 0;
    double shift_ = 0.0;
    std::unique_ptr<Factor> factor_;
    Vec inv_diag_;
};

DenseMat solve_spd(const SparseSym& a, const DenseMat& b, const SolveConfig& cfg = {},
                   SolveReport* report = nullptr);
DenseMat solve_spd(const SparseSym& a, const SparseRect& b, const SolveConfig& cfg = {},
                   SolveReport* report = nullptr);

} // namespace bha
