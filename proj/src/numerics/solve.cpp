#include "bha/numerics/solve.hpp"

#include "bha/errors.hpp"
#include "bha/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bha {

namespace {

constexpr int kMaxRefinementSweeps = 30;

bool factor_ok(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                           Eigen::AMDOrdering<int>>& f) {
    if (f.info() != Eigen::Success)
        return false;
    const Vec d = f.vectorD();
    if (d.size() == 0)
        return true;
    if (!d.allFinite())
        return false;
    const double dmax = d.cwiseAbs().maxCoeff();
    return d.minCoeff() > 1e-15 * dmax;
}

} // namespace

void SolveConfig::validate() const {
    if (!(rel_residual_tol > 0.0))
        throw std::invalid_argument("SolveConfig: rel_residual_tol must be > 0");
    if (max_iters && *max_iters < 1)
        throw std::invalid_argument("SolveConfig: max_iters must be >= 1");
    if (regularization < 0.0)
        throw std::invalid_argument("SolveConfig: regularization must be >= 0");
}

SpdSolver::SpdSolver(const SparseSym& a, SolveConfig cfg) : a_(&a), cfg_(cfg), n_(a.size()) {
    cfg_.validate();
    if (!cfg_.max_iters)
        cfg_.max_iters = std::max<Index>(1, 10 * n_);
    if (n_ == 0)
        return;

    if (cfg_.method == SolveMethod::conjugate_gradient) {
        inv_diag_.resize(n_);
        for (Index i = 0; i < n_; ++i) {
            const double d = a.coeff(i, i);
            inv_diag_[i] = d > 0.0 ? 1.0 / d : 1.0;
        }
        return;
    }

    Eigen::SparseMatrix<double> lower = a.to_eigen();
    factor_ = std::make_unique<Factor>();
    factor_->compute(lower);
    if (factor_ok(*factor_))
        return;

    shift_ = cfg_.regularization > 0.0 ? cfg_.regularization : 1e-9 * a.trace() / static_cast<double>(n_);
    if (!(shift_ > 0.0))
        throw SingularOperator("factorization failed and the trace gives no usable regularization");
    Eigen::SparseMatrix<double> eye(n_, n_);
    eye.setIdentity();
    Eigen::SparseMatrix<double> shifted = lower + shift_ * eye;
    factor_->compute(shifted);
    if (!factor_ok(*factor_))
        throw SingularOperator("factorization failed after regularization by " +
                               std::to_string(shift_));
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Vec SpdSolver::solve(const Vec& b, Index* iterations) const {
    if (b.size() != n_)
        throw DimensionMismatch("SpdSolver::solve: right-hand side has wrong length");
    if (n_ == 0)
        return b;
    return cfg_.method == SolveMethod::cholesky ? solve_cholesky(b, iterations) : solve_cg(b, iterations);
}

Vec SpdSolver::solve_cholesky(const Vec& b, Index* iterations) const {
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        if (iterations)
            *iterations = 0;
        return Vec::Zero(n_);
    }
    Vec x = factor_->solve(b);
    Vec r = b - a_->multiply(x);
    int sweeps = 0;
    // Iterative refinement against the unshifted matrix; only needed after a
    // regularized factorization or on ill-conditioned input.
    while (r.norm() > cfg_.rel_residual_tol * bnorm && sweeps < kMaxRefinementSweeps) {
        x += factor_->solve(r);
        r = b - a_->multiply(x);
        ++sweeps;
    }
    const double rel = r.norm() / bnorm;
    if (!(rel <= cfg_.rel_residual_tol))
        throw SingularOperator("sparse solve residual " + std::to_string(rel) +
                               " exceeds tolerance after refinement");
    if (iterations)
        *iterations = sweeps;
    return x;
}

Vec SpdSolver::solve_cg(const Vec& b, Index* iterations) const {
    const double bnorm = b.norm();
    Vec x = Vec::Zero(n_);
    if (bnorm == 0.0) {
        if (iterations)
            *iterations = 0;
        return x;
    }
    Vec r = b;
    Vec z = r.cwiseProduct(inv_diag_);
    Vec p = z;
    double rz = r.dot(z);
    const Index limit = *cfg_.max_iters;
    for (Index it = 1; it <= limit; ++it) {
        const Vec ap = a_->multiply(p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0))
            throw SingularOperator("conjugate gradient met a non-positive curvature direction");
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        if (r.norm() <= cfg_.rel_residual_tol * bnorm) {
            // Recursive residuals drift; confirm with the true one.
            const Vec true_r = b - a_->multiply(x);
            if (true_r.norm() <= cfg_.rel_residual_tol * bnorm) {
                if (iterations)
                    *iterations = it;
                return x;
            }
            r = true_r;
        }
        z = r.cwiseProduct(inv_diag_);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    throw NonConvergence("conjugate gradient did not reach tolerance in " + std::to_string(limit) +
                         " iterations");
}

DenseMat SpdSolver::solve(const DenseMat& b, SolveReport* report) const {
    if (b.rows() != n_)
        throw DimensionMismatch("SpdSolver::solve: right-hand side has wrong row count");
    DenseMat x(n_, b.cols());
    std::vector<Index> iters(static_cast<std::size_t>(b.cols()), 0);
    parallel_for(static_cast<std::size_t>(b.cols()), cfg_.threads, [&](std::size_t c) {
        const auto col = static_cast<Index>(c);
        x.col(col) = solve(Vec(b.col(col)), &iters[c]);
    });
    if (report) {
        report->regularized = regularized();
        report->shift = shift_;
        report->max_iterations = iters.empty() ? 0 : *std::max_element(iters.begin(), iters.end());
        double worst = 0.0;
        for (Index c = 0; c < b.cols() && n_ > 0; ++c) {
            const double bn = b.col(c).norm();
            if (bn > 0.0)
                worst = std::max(worst, (b.col(c) - a_->multiply(Vec(x.col(c)))).norm() / bn);
        }
        report->max_rel_residual = worst;
    }
    return x;
}

DenseMat SpdSolver::solve(const SparseRect& b, SolveReport* report) const {
    return solve(b.to_dense(), report);
}

DenseMat solve_spd(const SparseSym& a, const DenseMat& b, const SolveConfig& cfg, SolveReport* report) {
    return SpdSolver(a, cfg).solve(b, report);
}

DenseMat solve_spd(const SparseSym& a, const SparseRect& b, const SolveConfig& cfg, SolveReport* report) {
    return SpdSolver(a, cfg).solve(b, report);
}

} // namespace bha
