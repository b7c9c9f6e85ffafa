#pragma once

#include "bha/numerics/sparse.hpp"

namespace bha {

struct SymEig {
    Vec values;      ///< descending
    DenseMat vectors; ///< column k pairs with values[k]
};

/// Full eigendecomposition of a small symmetric matrix, eigenvalues descending.
/// Throws NonSymmetric when max|S - S^T| > 1e-8 * ||S||_F.
SymEig dense_eig_sym(const DenseMat& s);

struct ThinQr {
    DenseMat q; ///< n x l, orthonormal columns
    DenseMat r; ///< l x l, upper triangular
};

/// Householder thin QR of a tall matrix (rows >= cols). Rank deficiency is allowed.
ThinQr thin_qr(const DenseMat& a);

struct PseudoInverse {
    DenseMat pinv;
    /// sigma_min / sigma_max over all singular values (0 when singular or empty).
    double conditioning = 0.0;
    Index rank = 0;
};

/// Moore-Penrose pseudoinverse by SVD, dropping singular values below rcond * sigma_max.
PseudoInverse pseudo_inverse(const DenseMat& a, double rcond);

} // namespace bha
