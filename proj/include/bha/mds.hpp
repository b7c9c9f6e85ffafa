#pragma once

#include "bha/approx.hpp"
#include "bha/geodesic.hpp"
#include "bha/numerics/lanczos.hpp"
#include "bha/numerics/sparse.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bha {

enum class MdsMethod { exact, bmds, sbmds };

std::string to_string(MdsMethod method);

struct Embedding {
    DenseMat z;      ///< n x m
    Vec eigenvalues; ///< m, descending
    MdsMethod method = MdsMethod::exact;
    /// Eigenvalues among the top m that were negative; their coordinates are zero.
    Index zeroed_negative = 0;
    std::vector<std::string> warnings;
};

/// J = I - (1/n) 1 1^T applied without forming it.
class CenteringOperator {
public:
    explicit CenteringOperator(Index n) : n_(n) {}
    Index size() const noexcept { return n_; }
    Vec apply(const Vec& x) const;
    /// Centers every column.
    DenseMat apply(const DenseMat& x) const;

private:
    Index n_;
};

/// Classical scaling of a dense matrix of squared distances.
Embedding mds_exact(const DenseMat& squared_distances, Index m);

/// QR path: Q R = J P, then the l x l eigenproblem of -1/2 R W R^T.
Embedding bmds(const BhaApprox& approx, Index m);

/// v -> -1/2 J P W P^T J v
LinearOperator sbmds_operator(const BhaApprox& approx);

/// Lanczos path on the factored operator.
Embedding sbmds(const BhaApprox& approx, Index m, const LanczosConfig& cfg = {});

/// ||Z Z^T + 1/2 J E J||_F^2 against a dense squared-distance matrix.
double stress(const DenseMat& z, const DenseMat& squared_distances);

/// Same objective against the factored squared-distance approximation.
double stress(const DenseMat& z, const BhaApprox& approx);

struct RowSample {
    std::vector<Index> rows; ///< ascending
    DenseMat values;         ///< |rows| x n distance rows (not squared)
    std::uint64_t seed = 0;
    bool full = false;
};

/// Oracle rows for `count` distinct vertices chosen with `seed`; every row
/// (in order) when count is 0 or >= n.
RowSample sample_rows(const DistanceOracle& oracle, Index count, std::uint64_t seed, unsigned threads = 1);

struct StressEstimate {
    double value = 0.0;
    Index sample_size = 0;
    std::uint64_t seed = 0;
};

/// Row-sampled stress against squared oracle distances. Row and grand means
/// of E are estimated from the sample; the sum over sampled rows is scaled by
/// n / |sample|. With every row sampled this equals the dense stress.
StressEstimate stress(const DenseMat& z, const RowSample& sample);

struct ErrorEstimate {
    double epsilon = 0.0;
    Index sample_size = 0;
    std::uint64_t seed = 0;
    bool full = false;
};

/// ||K_hat - K||_F^2 / ||K||_F^2 over the given rows. Squared approximations
/// are compared with elementwise squared references.
ErrorEstimate relative_error(const BhaApprox& approx, const RowSample& reference);
ErrorEstimate relative_error(const NystromApprox& approx, const RowSample& reference);
ErrorEstimate relative_error(const BhaApprox& approx, const DenseMat& full_reference);
ErrorEstimate relative_error(const NystromApprox& approx, const DenseMat& full_reference);

/// The ratio itself, for pre-evaluated rows.
double relative_error(const DenseMat& approx_rows, const DenseMat& reference_rows);

} // namespace bha
