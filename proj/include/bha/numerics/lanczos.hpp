#pragma once

#include "bha/numerics/sparse.hpp"

#include <cstdint>
#include <functional>

namespace bha {

/// y = A x for a symmetric operator that is never stored.
using LinearOperator = std::function<Vec(const Vec&)>;

struct LanczosConfig {
    /// Residual bound ||A v - lambda v|| <= tol * |lambda_max|.
    double tol = 1e-10;
    /// Maximum number of restarts.
    int max_restarts = 500;
    /// Krylov basis size; 0 picks max(2k + 10, 20) capped at n.
    Index basis_size = 0;
    std::uint64_t seed = 0;
};

struct LanczosResult {
    Vec values;       ///< k eigenvalues, descending
    DenseMat vectors; ///< n x k, orthonormal
    Vec residuals;    ///< ||A v - lambda v|| per pair
    int restarts = 0;
    Index matvecs = 0;
};

/// Top-k algebraic eigenpairs of a symmetric operator using thick-restart
/// Lanczos with full reorthogonalization.
LanczosResult lanczos_topk(const LinearOperator& apply, Index n, Index k, const LanczosConfig& cfg = {});

} // namespace bha
