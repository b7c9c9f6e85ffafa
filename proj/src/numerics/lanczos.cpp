#include "bha/numerics/lanczos.hpp"

#include "bha/errors.hpp"
#include "bha/numerics/dense.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace bha {

namespace {

/// Classical Gram-Schmidt applied twice against the first `cols` columns.
void orthogonalize(const DenseMat& basis, Index cols, Vec& w) {
    if (cols == 0)
        return;
    for (int pass = 0; pass < 2; ++pass) {
        const Vec coeffs = basis.leftCols(cols).transpose() * w;
        w.noalias() -= basis.leftCols(cols) * coeffs;
    }
}

Vec random_unit(Index n, std::mt19937_64& rng, const DenseMat& basis, Index cols) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int attempt = 0; attempt < 8; ++attempt) {
        Vec v(n);
        for (Index i = 0; i < n; ++i)
            v[i] = dist(rng);
        orthogonalize(basis, cols, v);
        const double nv = v.norm();
        if (nv > 1e-8)
            return v / nv;
    }
    throw NonConvergence("lanczos: could not extend the Krylov basis");
}

} // namespace

LanczosResult lanczos_topk(const LinearOperator& apply, Index n, Index k, const LanczosConfig& cfg) {
    if (k < 1 || k >= n)
        throw std::invalid_argument("lanczos_topk: need 1 <= k < n");
    if (!(cfg.tol > 0.0) || cfg.max_restarts < 0)
        throw std::invalid_argument("lanczos_topk: invalid configuration");

    Index ncv = cfg.basis_size > 0 ? cfg.basis_size : std::max<Index>(2 * k + 10, 20);
    ncv = std::clamp<Index>(ncv, k + 1, n);

    std::mt19937_64 rng(cfg.seed);
    DenseMat v(n, ncv);
    DenseMat av(n, ncv);
    LanczosResult out;

    Vec next = random_unit(n, rng, v, 0);
    Index cur = 0;
    for (int restart = 0; restart <= cfg.max_restarts; ++restart) {
        while (cur < ncv) {
            v.col(cur) = next;
            Vec w = apply(next);
            if (w.size() != n)
                throw DimensionMismatch("lanczos_topk: operator returned wrong length");
            ++out.matvecs;
            av.col(cur) = w;
            const double scale = std::max(w.norm(), 1e-300);
            ++cur;
            orthogonalize(v, cur, w);
            const double beta = w.norm();
            if (cur == n)
                break;
            // Breakdown: the basis spans an invariant subspace, continue with a
            // fresh direction orthogonal to everything found so far.
            next = beta > 1e-12 * scale ? Vec(w / beta) : random_unit(n, rng, v, cur);
        }

        DenseMat h = v.leftCols(cur).transpose() * av.leftCols(cur);
        h = 0.5 * (h + h.transpose()).eval();
        const SymEig ritz = dense_eig_sym(h);

        const DenseMat y = ritz.vectors.leftCols(k);
        DenseMat x = v.leftCols(cur) * y;
        const DenseMat ax = av.leftCols(cur) * y;
        Vec res(k);
        for (Index i = 0; i < k; ++i)
            res[i] = (ax.col(i) - ritz.values[i] * x.col(i)).norm();
        const double lam_max = ritz.values.cwiseAbs().maxCoeff();

        if (cur == n || (res.array() <= cfg.tol * lam_max).all()) {
            out.values = ritz.values.head(k);
            out.vectors = std::move(x);
            out.residuals = res;
            out.restarts = restart;
            return out;
        }

        // Thick restart: keep the leading Ritz vectors; `next` is orthogonal to
        // the old basis and therefore to their span.
        const Index keep = std::min<Index>(cur - 1, k + (ncv - k) / 2);
        const DenseMat yk = ritz.vectors.leftCols(keep);
        const DenseMat vk = v.leftCols(cur) * yk;
        const DenseMat avk = av.leftCols(cur) * yk;
        v.leftCols(keep) = vk;
        av.leftCols(keep) = avk;
        cur = keep;
        orthogonalize(v, cur, next);
        const double nn = next.norm();
        next = nn > 1e-8 ? Vec(next / nn) : random_unit(n, rng, v, cur);
    }
    throw NonConvergence("lanczos_topk: no convergence after " + std::to_string(cfg.max_restarts) +
                         " restarts");
}

} // namespace bha
