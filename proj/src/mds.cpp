#include "bha/mds.hpp"

#include "bha/errors.hpp"
#include "bha/numerics/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bha {

std::string to_string(MdsMethod method) {
    switch (method) {
    case MdsMethod::exact:
        return "exact";
    case MdsMethod::bmds:
        return "bmds";
    case MdsMethod::sbmds:
        return "sbmds";
    }
    return "unknown";
}

Vec CenteringOperator::apply(const Vec& x) const {
    if (x.size() != n_)
        throw DimensionMismatch("CenteringOperator: wrong length");
    if (n_ == 0)
        return x;
    return x.array() - x.mean();
}

DenseMat CenteringOperator::apply(const DenseMat& x) const {
    if (x.rows() != n_)
        throw DimensionMismatch("CenteringOperator: wrong row count");
    if (n_ == 0)
        return x;
    return x.rowwise() - x.colwise().mean();
}

namespace {

Embedding make_embedding(const Vec& values, const DenseMat& vectors, Index m, MdsMethod method) {
    Embedding e;
    e.method = method;
    e.eigenvalues = values.head(m);
    e.z = DenseMat::Zero(vectors.rows(), m);
    for (Index c = 0; c < m; ++c) {
        if (values[c] < 0.0) {
            ++e.zeroed_negative;
            continue;
        }
        e.z.col(c) = vectors.col(c) * std::sqrt(values[c]);
    }
    if (e.zeroed_negative > 0)
        e.warnings.push_back(std::to_string(e.zeroed_negative) +
                             " of the top eigenvalues are negative; their coordinates were set to zero");
    return e;
}

void check_dimension(Index m, Index limit, const char* who) {
    if (m < 1 || m > limit)
        throw std::invalid_argument(std::string(who) + ": embedding dimension out of range");
}

/// Gram matrix of J P, i.e. P^T P - s s^T / n with s = P^T 1.
DenseMat centered_gram(const InterpOperator& p) {
    const Index n = p.rows();
    const Index l = p.cols();
    DenseMat g;
    if (p.is_sparse()) {
        const SparseRect& pu = p.sparse_block();
        std::vector<std::vector<std::pair<Index, double>>> by_row(static_cast<std::size_t>(pu.rows()));
        for (Index t = 0; t < l; ++t) {
            const auto r = pu.column_rows(t);
            const auto v = pu.column_values(t);
            for (std::size_t k = 0; k < r.size(); ++k)
                by_row[static_cast<std::size_t>(r[k])].emplace_back(t, v[k]);
        }
        g = DenseMat::Identity(l, l);
        for (const auto& row : by_row)
            for (const auto& [a, va] : row)
                for (const auto& [b, vb] : row)
                    g(a, b) += va * vb;
    } else {
        const DenseMat& pu = p.dense_block();
        g = pu.transpose() * pu;
        g.diagonal().array() += 1.0;
    }
    const Vec s = p.apply_transpose(Vec::Ones(n));
    g -= (s * s.transpose()) / static_cast<double>(n);
    return g;
}

double stress_from_rows(const DenseMat& z, std::span<const Index> rows, const DenseMat& e_rows) {
    const Index n = e_rows.cols();
    if (z.rows() != n)
        throw DimensionMismatch("stress: embedding and distances disagree on n");
    const auto count = static_cast<double>(rows.size());
    if (rows.empty())
        return 0.0;
    const Vec r = e_rows.colwise().sum().transpose() / count;
    const double g = r.mean();
    double total = 0.0;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        const Index i = rows[s];
        const Vec zz = z * z.row(i).transpose();
        for (Index j = 0; j < n; ++j) {
            const double b = -0.5 * (e_rows(static_cast<Index>(s), j) - r[i] - r[j] + g);
            const double d = zz[j] - b;
            total += d * d;
        }
    }
    return total * static_cast<double>(n) / count;
}

std::vector<Index> all_rows(Index n) {
    std::vector<Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Index{0});
    return rows;
}

} // namespace

Embedding mds_exact(const DenseMat& e, Index m) {
    if (e.rows() != e.cols())
        throw DimensionMismatch("mds_exact: matrix is not square");
    check_dimension(m, e.rows(), "mds_exact");
    const CenteringOperator j(e.rows());
    const DenseMat jej = j.apply(DenseMat(j.apply(e).transpose()));
    const SymEig eig = dense_eig_sym(-0.5 * jej);
    return make_embedding(eig.values, eig.vectors, m, MdsMethod::exact);
}

Embedding bmds(const BhaApprox& approx, Index m) {
    if (!approx.squared)
        throw std::invalid_argument("bmds: approximation must hold squared distances");
    check_dimension(m, approx.p.cols(), "bmds");
    const CenteringOperator j(approx.size());
    const ThinQr qr = thin_qr(j.apply(approx.p.to_dense()));
    const DenseMat small = -0.5 * qr.r * approx.w * qr.r.transpose();
    const SymEig eig = dense_eig_sym(0.5 * (small + small.transpose()));
    Embedding e = make_embedding(eig.values, qr.q * eig.vectors.leftCols(m), m, MdsMethod::bmds);
    return e;
}

LinearOperator sbmds_operator(const BhaApprox& approx) {
    return [&approx](const Vec& v) {
        const CenteringOperator j(approx.size());
        const Vec y = approx.w * approx.p.apply_transpose(j.apply(v));
        return Vec(-0.5 * j.apply(approx.p.apply(y)));
    };
}

Embedding sbmds(const BhaApprox& approx, Index m, const LanczosConfig& cfg) {
    if (!approx.squared)
        throw std::invalid_argument("sbmds: approximation must hold squared distances");
    check_dimension(m, std::min(approx.size() - 1, approx.p.cols()), "sbmds");
    const LanczosResult res = lanczos_topk(sbmds_operator(approx), approx.size(), m, cfg);
    return make_embedding(res.values, res.vectors, m, MdsMethod::sbmds);
}

double stress(const DenseMat& z, const DenseMat& e) {
    if (e.rows() != e.cols())
        throw DimensionMismatch("stress: matrix is not square");
    const auto rows = all_rows(e.rows());
    return stress_from_rows(z, rows, e);
}

double stress(const DenseMat& z, const BhaApprox& approx) {
    if (!approx.squared)
        throw std::invalid_argument("stress: approximation must hold squared distances");
    if (z.rows() != approx.size())
        throw DimensionMismatch("stress: embedding and approximation disagree on n");
    // ||ZZ^T - B||^2 = ||Z^T Z||^2 - 2 tr(Z^T B Z) + ||B||^2, B = -1/2 J P W P^T J.
    const DenseMat ztz = z.transpose() * z;
    const LinearOperator op = sbmds_operator(approx);
    double cross = 0.0;
    for (Index c = 0; c < z.cols(); ++c)
        cross += z.col(c).dot(op(Vec(z.col(c))));
    const DenseMat wg = approx.w * centered_gram(approx.p);
    const double b_sq = 0.25 * wg.cwiseProduct(wg.transpose()).sum();
    return std::max(0.0, ztz.squaredNorm() - 2.0 * cross + b_sq);
}

RowSample sample_rows(const DistanceOracle& oracle, Index count, std::uint64_t seed, unsigned threads) {
    const Index n = oracle.size();
    RowSample s;
    s.seed = seed;
    if (count <= 0 || count >= n) {
        s.rows = all_rows(n);
        s.full = true;
    } else {
        std::vector<Index> perm = all_rows(n);
        std::mt19937_64 rng(seed);
        // Partial Fisher-Yates with an explicit draw so the sample does not
        // depend on the standard library's shuffle implementation.
        for (Index k = 0; k < count; ++k) {
            const auto span = static_cast<std::uint64_t>(n - k);
            const Index pick = k + static_cast<Index>(rng() % span);
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pick)]);
        }
        s.rows.assign(perm.begin(), perm.begin() + count);
        std::sort(s.rows.begin(), s.rows.end());
    }
    s.values = distance_submatrix(oracle, s.rows, threads);
    return s;
}

StressEstimate stress(const DenseMat& z, const RowSample& sample) {
    StressEstimate out;
    out.value = stress_from_rows(z, sample.rows, sample.values.cwiseProduct(sample.values));
    out.sample_size = static_cast<Index>(sample.rows.size());
    out.seed = sample.seed;
    return out;
}

double relative_error(const DenseMat& approx_rows, const DenseMat& reference_rows) {
    if (approx_rows.rows() != reference_rows.rows() || approx_rows.cols() != reference_rows.cols())
        throw DimensionMismatch("relative_error: shapes disagree");
    const double ref = reference_rows.squaredNorm();
    if (ref == 0.0)
        throw std::invalid_argument("relative_error: reference is identically zero");
    return (approx_rows - reference_rows).squaredNorm() / ref;
}

namespace {

template <typename Approx>
ErrorEstimate error_on_rows(const Approx& a, std::span<const Index> rows, const DenseMat& ref, bool squared,
                            std::uint64_t seed, bool full) {
    ErrorEstimate e;
    const DenseMat approx_rows = evaluate_rows(a, rows);
    e.epsilon = squared ? relative_error(approx_rows, ref.cwiseProduct(ref)) : relative_error(approx_rows, ref);
    e.sample_size = static_cast<Index>(rows.size());
    e.seed = seed;
    e.full = full;
    return e;
}

} // namespace

ErrorEstimate relative_error(const BhaApprox& approx, const RowSample& reference) {
    return error_on_rows(approx, reference.rows, reference.values, approx.squared, reference.seed, reference.full);
}

ErrorEstimate relative_error(const NystromApprox& approx, const RowSample& reference) {
    return error_on_rows(approx, reference.rows, reference.values, false, reference.seed, reference.full);
}

ErrorEstimate relative_error(const BhaApprox& approx, const DenseMat& full_reference) {
    const auto rows = all_rows(full_reference.rows());
    return error_on_rows(approx, rows, full_reference, approx.squared, 0, true);
}

ErrorEstimate relative_error(const NystromApprox& approx, const DenseMat& full_reference) {
    const auto rows = all_rows(full_reference.rows());
    return error_on_rows(approx, rows, full_reference, false, 0, true);
}

} // namespace bha
