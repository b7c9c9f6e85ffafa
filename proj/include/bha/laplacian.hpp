#pragma once

#include "bha/mesh.hpp"
#include "bha/numerics/sparse.hpp"

#include <span>
#include <vector>

namespace bha {

/// Cotangent weights between edge endpoints: half the sum of the cotangents
/// of the angles opposite the edge (one angle on boundary edges). Obtuse
/// angles yield negative weights, which are kept.
SparseSym cotan_adjacency(const TriMesh& mesh);

/// One third of the area of the faces incident on each vertex.
Vec lumped_mass(const TriMesh& mesh);

struct LaplacianParts {
    Vec mass;        ///< D diagonal
    SparseSym adjacency; ///< A
    Vec weight_sum;  ///< V diagonal, row sums of A
};

LaplacianParts laplacian_parts(const TriMesh& mesh);

/// Split of the vertex set into landmarks b (in landmark order) and the
/// remaining vertices u (ascending).
class BlockPartition {
public:
    BlockPartition(Index n, std::span<const Index> landmarks);

    Index size() const noexcept { return n_; }
    const std::vector<Index>& landmarks() const noexcept { return landmarks_; }
    const std::vector<Index>& free() const noexcept { return free_; }
    bool is_landmark(Index v) const { return is_landmark_[static_cast<std::size_t>(v)] != 0; }
    /// Position of v inside its own block.
    Index local(Index v) const { return local_[static_cast<std::size_t>(v)]; }

private:
    Index n_;
    std::vector<Index> landmarks_;
    std::vector<Index> free_;
    std::vector<char> is_landmark_;
    std::vector<Index> local_;
};

/// Discrete biharmonic operator M = (V - A)^T D^-1 (V - A) with block access
/// under a landmark partition. Blocks are gathered from M on request; M itself
/// is never permuted.
class BiharmonicOp {
public:
    BiharmonicOp() = default;
    explicit BiharmonicOp(SparseSym m) : m_(std::move(m)) {}

    const SparseSym& matrix() const noexcept { return m_; }
    Index size() const noexcept { return m_.size(); }

    SparseSym uu_block(const BlockPartition& part) const;
    /// (n-l) x l; column t belongs to landmark t.
    SparseRect ub_block(const BlockPartition& part) const;
    /// l x (n-l)
    SparseRect bu_block(const BlockPartition& part) const;
    DenseMat bb_block(const BlockPartition& part) const;

private:
    SparseSym m_;
};

/// Throws ZeroMass when any mass is <= 0.
BiharmonicOp biharmonic_operator(const LaplacianParts& parts);

/// Graph variant: D = I and A the 0/1 adjacency, so M = (V - A)^2.
BiharmonicOp graph_biharmonic(const SparseSym& adjacency);

} // namespace bha
