#pragma once

#include "bha/geodesic.hpp"
#include "bha/laplacian.hpp"
#include "bha/numerics/solve.hpp"
#include "bha/numerics/sparse.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace bha {

/// First landmark: a fixed vertex, or uniform at random from `seed` when unset.
struct FirstLandmark {
    std::optional<Index> index = 0;
    std::uint64_t seed = 0;

    static FirstLandmark fixed(Index i) { return {i, 0}; }
    static FirstLandmark random(std::uint64_t seed) { return {std::nullopt, seed}; }
};

struct LandmarkSet {
    std::vector<Index> indices;
    /// rows.row(t) is the distance row of indices[t] (l x n).
    DenseMat rows;
    /// Distance from each vertex to its nearest landmark.
    Vec min_dist;

    Index size() const noexcept { return static_cast<Index>(indices.size()); }
};

/// Farthest point sampling: each new landmark maximizes the distance to the
/// nearest landmark chosen so far, ties going to the lowest vertex index.
/// Costs exactly l oracle rows.
LandmarkSet select_landmarks(const DistanceOracle& oracle, Index l, FirstLandmark first = {});

/// Per-column non-zero budget p = ceil((n - l) * p_row / l), clamped to [1, n - l].
Index column_budget(Index n, Index l, double p_row);

/// The n x l interpolation operator P with an implicit identity block at the
/// landmark rows and an explicit (n - l) x l block P_u, stored dense or sparse.
class InterpOperator {
public:
    static InterpOperator make_dense(Index n, std::vector<Index> landmarks, DenseMat free_block);
    static InterpOperator make_sparse(Index n, std::vector<Index> landmarks, SparseRect free_block);

    Index rows() const noexcept { return partition_.size(); }
    Index cols() const noexcept { return static_cast<Index>(partition_.landmarks().size()); }
    const std::vector<Index>& landmarks() const noexcept { return partition_.landmarks(); }
    const BlockPartition& partition() const noexcept { return partition_; }

    bool is_sparse() const noexcept { return std::holds_alternative<SparseRect>(block_); }
    const DenseMat& dense_block() const { return std::get<DenseMat>(block_); }
    const SparseRect& sparse_block() const { return std::get<SparseRect>(block_); }

    /// Stored entries of P_u (the identity block is implicit).
    Index stored_entries() const;
    Index max_column_entries() const;

    /// Row v of P as a dense l-vector.
    Vec row(Index v) const;
    /// Rows of P for the given vertices, |vertices| x l, gathered in one pass.
    DenseMat gather_rows(std::span<const Index> vertices) const;
    /// P y
    Vec apply(const Vec& y) const;
    /// P^T x
    Vec apply_transpose(const Vec& x) const;
    /// Full n x l matrix in vertex order.
    DenseMat to_dense() const;

private:
    InterpOperator(BlockPartition partition, std::variant<DenseMat, SparseRect> block)
        : partition_(std::move(partition)), block_(std::move(block)) {}

    BlockPartition partition_;
    std::variant<DenseMat, SparseRect> block_;
};

/// Dense P_u = -M_uu^-1 M_ub, one sparse solve per landmark column.
InterpOperator interpolation_operator(const BiharmonicOp& m, std::span<const Index> landmarks,
                                      const SolveConfig& cfg = {}, SolveReport* report = nullptr);

/// Keeps the p = column_budget(n, l, p_row) largest-magnitude entries of each
/// P_u column (ties to the lower row); kept values are not renormalized.
InterpOperator sparsify_operator(const InterpOperator& dense, double p_row);

/// Same result as sparsify_operator(interpolation_operator(...)) without ever
/// holding more than a batch of dense columns.
InterpOperator sparse_interpolation_operator(const BiharmonicOp& m, std::span<const Index> landmarks,
                                             double p_row, const SolveConfig& cfg = {},
                                             SolveReport* report = nullptr);

/// K_hat = P W P^T held in factored form.
struct BhaApprox {
    InterpOperator p;
    /// Landmark-to-landmark distances, squared elementwise when `squared`.
    DenseMat w;
    bool squared = false;

    Index size() const noexcept { return p.rows(); }
};

BhaApprox bha(InterpOperator p, const LandmarkSet& landmarks, bool squared);

/// K_hat = C W^+ C^T.
struct NystromApprox {
    std::vector<Index> landmarks;
    DenseMat c;      ///< n x l
    DenseMat w_pinv; ///< l x l
    double rcond = 1e-12;
    /// sigma_min / sigma_max of W.
    double conditioning = 0.0;
    Index rank = 0;

    Index size() const noexcept { return c.rows(); }
};

NystromApprox nystrom(const LandmarkSet& landmarks, double rcond = 1e-12);

DenseMat evaluate_rows(const BhaApprox& a, std::span<const Index> rows);
DenseMat evaluate_rows(const NystromApprox& a, std::span<const Index> rows);
double evaluate_entry(const BhaApprox& a, Index i, Index j);

struct FmdsConfig {
    double mu = 50.0;
};

/// H = P (M_bb + mu I + M_bu P_u)^-1 mu, n x l in vertex order.
DenseMat fmds_operator(const InterpOperator& p, const BiharmonicOp& m, const FmdsConfig& cfg = {});

} // namespace bha
