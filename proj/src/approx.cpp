#include "bha/approx.hpp"

#include "bha/errors.hpp"
#include "bha/numerics/dense.hpp"
#include "bha/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace bha {

LandmarkSet select_landmarks(const DistanceOracle& oracle, Index l, FirstLandmark first) {
    const Index n = oracle.size();
    if (l < 1 || l > n)
        throw std::invalid_argument("select_landmarks: need 1 <= l <= n");
    Index start = 0;
    if (first.index) {
        start = *first.index;
        if (start < 0 || start >= n)
            throw std::out_of_range("select_landmarks: first landmark out of range");
    } else {
        std::mt19937_64 rng(first.seed);
        start = static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
    }

    LandmarkSet set;
    set.indices.reserve(static_cast<std::size_t>(l));
    set.rows.resize(l, n);
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    Index next = start;
    for (Index t = 0; t < l; ++t) {
        set.indices.push_back(next);
        chosen[static_cast<std::size_t>(next)] = 1;
        set.rows.row(t) = distance_row(oracle, next).transpose();
        if (t == 0)
            set.min_dist = set.rows.row(0).transpose();
        else
            set.min_dist = set.min_dist.cwiseMin(set.rows.row(t).transpose());
        if (count_unreachable(set.min_dist) > 0)
            throw Disconnected("vertex unreachable from landmark " + std::to_string(next));
        if (t + 1 == l)
            break;
        double best = -1.0;
        for (Index j = 0; j < n; ++j) {
            if (!chosen[static_cast<std::size_t>(j)] && set.min_dist[j] > best) {
                best = set.min_dist[j];
                next = j;
            }
        }
    }
    return set;
}

Index column_budget(Index n, Index l, double p_row) {
    if (l < 1 || l > n)
        throw std::invalid_argument("column_budget: need 1 <= l <= n");
    if (!(p_row > 0.0))
        throw std::invalid_argument("column_budget: p_row must be > 0");
    const Index nu = n - l;
    if (nu == 0)
        return 0;
    const double p = std::ceil(static_cast<double>(nu) * p_row / static_cast<double>(l));
    if (p >= static_cast<double>(nu))
        return nu;
    return std::max<Index>(1, static_cast<Index>(p));
}

// ---------------------------------------------------------------------------

InterpOperator InterpOperator::make_dense(Index n, std::vector<Index> landmarks, DenseMat free_block) {
    BlockPartition part(n, landmarks);
    if (free_block.rows() != n - static_cast<Index>(landmarks.size()) ||
        free_block.cols() != static_cast<Index>(landmarks.size()))
        throw DimensionMismatch("InterpOperator: dense block has wrong shape");
    return InterpOperator(std::move(part), std::move(free_block));
}

InterpOperator InterpOperator::make_sparse(Index n, std::vector<Index> landmarks, SparseRect free_block) {
    BlockPartition part(n, landmarks);
    if (free_block.rows() != n - static_cast<Index>(landmarks.size()) ||
        free_block.cols() != static_cast<Index>(landmarks.size()) ||
        free_block.filled_columns() != free_block.cols())
        throw DimensionMismatch("InterpOperator: sparse block has wrong shape");
    return InterpOperator(std::move(part), std::move(free_block));
}

Index InterpOperator::stored_entries() const {
    return is_sparse() ? sparse_block().nnz() : dense_block().size();
}

Index InterpOperator::max_column_entries() const {
    return is_sparse() ? sparse_block().max_column_nnz() : dense_block().rows();
}

Vec InterpOperator::row(Index v) const {
    const Index single[] = {v};
    return gather_rows(single).row(0).transpose();
}

DenseMat InterpOperator::gather_rows(std::span<const Index> vertices) const {
    const Index l = cols();
    DenseMat out = DenseMat::Zero(static_cast<Index>(vertices.size()), l);
    for (std::size_t s = 0; s < vertices.size(); ++s) {
        const Index v = vertices[s];
        if (v < 0 || v >= rows())
            throw std::out_of_range("InterpOperator: row index out of range");
        if (partition_.is_landmark(v))
            out(static_cast<Index>(s), partition_.local(v)) = 1.0;
        else if (!is_sparse())
            out.row(static_cast<Index>(s)) = dense_block().row(partition_.local(v));
    }
    if (!is_sparse())
        return out;

    std::vector<std::vector<Index>> targets(partition_.free().size());
    bool any = false;
    for (std::size_t s = 0; s < vertices.size(); ++s) {
        if (!partition_.is_landmark(vertices[s])) {
            targets[static_cast<std::size_t>(partition_.local(vertices[s]))].push_back(static_cast<Index>(s));
            any = true;
        }
    }
    if (!any)
        return out;
    const SparseRect& pu = sparse_block();
    for (Index t = 0; t < l; ++t) {
        const auto r = pu.column_rows(t);
        const auto val = pu.column_values(t);
        for (std::size_t k = 0; k < r.size(); ++k)
            for (Index s : targets[static_cast<std::size_t>(r[k])])
                out(s, t) = val[k];
    }
    return out;
}

Vec InterpOperator::apply(const Vec& y) const {
    if (y.size() != cols())
        throw DimensionMismatch("InterpOperator::apply: wrong length");
    const Vec free_part = is_sparse() ? sparse_block().multiply(y) : Vec(dense_block() * y);
    Vec out(rows());
    for (std::size_t s = 0; s < partition_.free().size(); ++s)
        out[partition_.free()[s]] = free_part[static_cast<Index>(s)];
    for (std::size_t t = 0; t < partition_.landmarks().size(); ++t)
        out[partition_.landmarks()[t]] = y[static_cast<Index>(t)];
    return out;
}

Vec InterpOperator::apply_transpose(const Vec& x) const {
    if (x.size() != rows())
        throw DimensionMismatch("InterpOperator::apply_transpose: wrong length");
    Vec xf(static_cast<Index>(partition_.free().size()));
    for (std::size_t s = 0; s < partition_.free().size(); ++s)
        xf[static_cast<Index>(s)] = x[partition_.free()[s]];
    Vec out = is_sparse() ? sparse_block().multiply_transpose(xf) : Vec(dense_block().transpose() * xf);
    for (std::size_t t = 0; t < partition_.landmarks().size(); ++t)
        out[static_cast<Index>(t)] += x[partition_.landmarks()[t]];
    return out;
}

DenseMat InterpOperator::to_dense() const {
    std::vector<Index> all(static_cast<std::size_t>(rows()));
    std::iota(all.begin(), all.end(), Index{0});
    return gather_rows(all);
}

// ---------------------------------------------------------------------------

namespace {

constexpr Index kColumnBatch = 64;

/// Largest-magnitude p entries of a column, returned in ascending row order.
void threshold_column(const Eigen::Ref<const Vec>& col, Index p, std::vector<Index>& rows,
                      std::vector<double>& vals) {
    const Index nu = col.size();
    rows.resize(static_cast<std::size_t>(nu));
    std::iota(rows.begin(), rows.end(), Index{0});
    if (p < nu) {
        const auto before = [&](Index a, Index b) {
            const double fa = std::abs(col[a]);
            const double fb = std::abs(col[b]);
            return fa != fb ? fa > fb : a < b;
        };
        std::nth_element(rows.begin(), rows.begin() + p, rows.end(), before);
        rows.resize(static_cast<std::size_t>(p));
        std::sort(rows.begin(), rows.end());
    }
    vals.clear();
    std::size_t w = 0;
    for (Index r : rows) {
        if (col[r] != 0.0) {
            rows[w++] = r;
            vals.push_back(col[r]);
        }
    }
    rows.resize(w);
}

struct FreeSystem {
    BlockPartition part;
    SparseSym uu;
    SparseRect ub;
};

FreeSystem free_system(const BiharmonicOp& m, std::span<const Index> landmarks) {
    if (landmarks.empty())
        throw std::invalid_argument("interpolation needs at least one landmark");
    BlockPartition part(m.size(), landmarks);
    SparseSym uu = m.uu_block(part);
    SparseRect ub = m.ub_block(part);
    return {std::move(part), std::move(uu), std::move(ub)};
}

/// Solves columns [begin, end) of M_uu X = -M_ub into `out` (nu x (end - begin)).
void solve_columns(const SparseSym& uu, const SpdSolver& solver, const SparseRect& ub, Index begin, Index end,
                   DenseMat& out, std::vector<Index>& iters, std::vector<double>& residuals) {
    const Index nu = ub.rows();
    out.resize(nu, end - begin);
    parallel_for(static_cast<std::size_t>(end - begin), solver.config().threads, [&](std::size_t c) {
        const Index t = begin + static_cast<Index>(c);
        Vec rhs = Vec::Zero(nu);
        const auto r = ub.column_rows(t);
        const auto v = ub.column_values(t);
        for (std::size_t k = 0; k < r.size(); ++k)
            rhs[r[k]] = -v[k];
        Index it = 0;
        Vec x = solver.solve(rhs, &it);
        const double bnorm = rhs.norm();
        residuals[static_cast<std::size_t>(t)] = bnorm > 0.0 ? (uu.multiply(x) - rhs).norm() / bnorm : 0.0;
        out.col(static_cast<Index>(c)) = x;
        iters[static_cast<std::size_t>(t)] = it;
    });
}

void fill_report(SolveReport* report, const SpdSolver& solver, const std::vector<Index>& iters,
                 const std::vector<double>& residuals) {
    if (!report)
        return;
    report->regularized = solver.regularized();
    report->shift = solver.shift();
    report->max_iterations = iters.empty() ? 0 : *std::max_element(iters.begin(), iters.end());
    report->max_rel_residual = residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

} // namespace

InterpOperator interpolation_operator(const BiharmonicOp& m, std::span<const Index> landmarks,
                                      const SolveConfig& cfg, SolveReport* report) {
    FreeSystem sys = free_system(m, landmarks);
    const Index nu = sys.uu.size();
    const Index l = static_cast<Index>(landmarks.size());
    DenseMat pu(nu, l);
    const SpdSolver solver(sys.uu, cfg);
    std::vector<Index> iters(static_cast<std::size_t>(l), 0);
    std::vector<double> residuals(static_cast<std::size_t>(l), 0.0);
    DenseMat batch;
    for (Index begin = 0; begin < l; begin += kColumnBatch) {
        const Index end = std::min(l, begin + kColumnBatch);
        solve_columns(sys.uu, solver, sys.ub, begin, end, batch, iters, residuals);
        pu.middleCols(begin, end - begin) = batch;
    }
    fill_report(report, solver, iters, residuals);
    return InterpOperator::make_dense(m.size(), sys.part.landmarks(), std::move(pu));
}

InterpOperator sparsify_operator(const InterpOperator& dense, double p_row) {
    if (dense.is_sparse())
        throw std::invalid_argument("sparsify_operator: operator is already sparse");
    const Index n = dense.rows();
    const Index l = dense.cols();
    const Index p = column_budget(n, l, p_row);
    const DenseMat& pu = dense.dense_block();
    SparseRect sparse(pu.rows(), l, p * l);
    std::vector<Index> rows;
    std::vector<double> vals;
    for (Index t = 0; t < l; ++t) {
        threshold_column(pu.col(t), p, rows, vals);
        sparse.append_column(rows, vals);
    }
    return InterpOperator::make_sparse(n, dense.landmarks(), std::move(sparse));
}

InterpOperator sparse_interpolation_operator(const BiharmonicOp& m, std::span<const Index> landmarks,
                                             double p_row, const SolveConfig& cfg, SolveReport* report) {
    FreeSystem sys = free_system(m, landmarks);
    const Index nu = sys.uu.size();
    const Index l = static_cast<Index>(landmarks.size());
    const Index p = column_budget(m.size(), l, p_row);
    const SpdSolver solver(sys.uu, cfg);
    std::vector<Index> iters(static_cast<std::size_t>(l), 0);
    std::vector<double> residuals(static_cast<std::size_t>(l), 0.0);
    SparseRect sparse(nu, l, p * l);
    DenseMat batch;
    std::vector<Index> rows;
    std::vector<double> vals;
    std::chrono::steady_clock::duration thresholding{};
    for (Index begin = 0; begin < l; begin += kColumnBatch) {
        const Index end = std::min(l, begin + kColumnBatch);
        solve_columns(sys.uu, solver, sys.ub, begin, end, batch, iters, residuals);
        const auto t0 = std::chrono::steady_clock::now();
        for (Index c = 0; c < end - begin; ++c) {
            threshold_column(batch.col(c), p, rows, vals);
            sparse.append_column(rows, vals);
        }
        thresholding += std::chrono::steady_clock::now() - t0;
    }
    fill_report(report, solver, iters, residuals);
    if (report)
        report->threshold_seconds = std::chrono::duration<double>(thresholding).count();
    return InterpOperator::make_sparse(m.size(), sys.part.landmarks(), std::move(sparse));
}

// ---------------------------------------------------------------------------

namespace {

DenseMat landmark_block(const LandmarkSet& landmarks) {
    const Index l = landmarks.size();
    DenseMat w(l, l);
    for (Index i = 0; i < l; ++i)
        for (Index j = 0; j < l; ++j)
            w(i, j) = landmarks.rows(i, landmarks.indices[static_cast<std::size_t>(j)]);
    return w;
}

} // namespace

BhaApprox bha(InterpOperator p, const LandmarkSet& landmarks, bool squared) {
    if (p.landmarks() != landmarks.indices)
        throw DimensionMismatch("bha: operator and landmark set disagree on landmarks");
    if (landmarks.rows.rows() != landmarks.size() || landmarks.rows.cols() != p.rows())
        throw DimensionMismatch("bha: landmark rows have wrong shape");
    DenseMat w = landmark_block(landmarks);
    if (squared)
        w = w.cwiseProduct(w);
    return BhaApprox{std::move(p), std::move(w), squared};
}

NystromApprox nystrom(const LandmarkSet& landmarks, double rcond) {
    if (!(rcond >= 0.0))
        throw std::invalid_argument("nystrom: rcond must be >= 0");
    NystromApprox out;
    out.landmarks = landmarks.indices;
    out.c = landmarks.rows.transpose();
    const PseudoInverse pinv = pseudo_inverse(landmark_block(landmarks), rcond);
    out.w_pinv = pinv.pinv;
    out.rcond = rcond;
    out.conditioning = pinv.conditioning;
    out.rank = pinv.rank;
    return out;
}

DenseMat evaluate_rows(const BhaApprox& a, std::span<const Index> rows) {
    const InterpOperator& p = a.p;
    const DenseMat y = p.gather_rows(rows) * a.w; // |rows| x l
    const Index n = p.rows();
    DenseMat out(static_cast<Index>(rows.size()), n);
    const auto& part = p.partition();
    for (std::size_t t = 0; t < part.landmarks().size(); ++t)
        out.col(part.landmarks()[t]) = y.col(static_cast<Index>(t));
    if (part.free().empty())
        return out;
    // Both storages accumulate the same products in the same order, so a
    // sparse block that kept every non-zero evaluates bit-identically.
    DenseMat free_vals = DenseMat::Zero(y.rows(), static_cast<Index>(part.free().size()));
    if (p.is_sparse()) {
        const SparseRect& pu = p.sparse_block();
        for (Index t = 0; t < pu.cols(); ++t) {
            const auto r = pu.column_rows(t);
            const auto v = pu.column_values(t);
            for (std::size_t k = 0; k < r.size(); ++k)
                free_vals.col(r[k]) += v[k] * y.col(t);
        }
    } else {
        const DenseMat& pu = p.dense_block();
        for (Index t = 0; t < pu.cols(); ++t)
            for (Index r = 0; r < pu.rows(); ++r)
                if (pu(r, t) != 0.0)
                    free_vals.col(r) += pu(r, t) * y.col(t);
    }
    for (std::size_t s = 0; s < part.free().size(); ++s)
        out.col(part.free()[s]) = free_vals.col(static_cast<Index>(s));
    return out;
}

DenseMat evaluate_rows(const NystromApprox& a, std::span<const Index> rows) {
    DenseMat cs(static_cast<Index>(rows.size()), a.c.cols());
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s] < 0 || rows[s] >= a.c.rows())
            throw std::out_of_range("evaluate_rows: row index out of range");
        cs.row(static_cast<Index>(s)) = a.c.row(rows[s]);
    }
    return (cs * a.w_pinv) * a.c.transpose();
}

double evaluate_entry(const BhaApprox& a, Index i, Index j) {
    const Vec pi = a.p.row(i);
    const Vec pj = a.p.row(j);
    return pi.dot(a.w * pj);
}

DenseMat fmds_operator(const InterpOperator& p, const BiharmonicOp& m, const FmdsConfig& cfg) {
    if (!(cfg.mu > 0.0))
        throw std::invalid_argument("fmds_operator: mu must be > 0");
    if (p.is_sparse())
        throw std::invalid_argument("fmds_operator: needs the dense interpolation operator");
    if (p.rows() != m.size())
        throw DimensionMismatch("fmds_operator: operator sizes disagree");
    const BlockPartition& part = p.partition();
    const Index l = p.cols();
    DenseMat s = m.bb_block(part);
    s.diagonal().array() += cfg.mu;
    // M_bu P_u = M_ub^T P_u; column t of M_ub is row t of M_bu.
    const SparseRect ub = m.ub_block(part);
    const DenseMat& pu = p.dense_block();
    for (Index t = 0; t < l; ++t) {
        const auto r = ub.column_rows(t);
        const auto v = ub.column_values(t);
        for (std::size_t k = 0; k < r.size(); ++k)
            s.row(t) += v[k] * pu.row(r[k]);
    }
    Eigen::FullPivLU<DenseMat> lu(s);
    if (!lu.isInvertible())
        throw SingularOperator("fmds_operator: M_bb + mu I + M_bu P_u is singular");
    const DenseMat scaled_inv = lu.solve(DenseMat::Identity(l, l) * cfg.mu);
    return p.to_dense() * scaled_inv;
}

} // namespace bha
