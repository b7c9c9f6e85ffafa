#pragma once

#include "bha/mesh.hpp"
#include "bha/numerics/sparse.hpp"

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace bha {

/// Undirected weighted graph in CSR form.
///
/// Weights are snapped to integer multiples of a power-of-two quantum (30
/// significant bits for the longest edge), so every path length is an exact
/// integer sum: d(i,j) == d(j,i) bit-for-bit and the triangle inequality holds
/// exactly in floating point.
class EdgeGraph {
public:
    static EdgeGraph from_mesh(const TriMesh& mesh);
    static EdgeGraph from_edges(Index n, std::span<const std::tuple<Index, Index, double>> edges);

    Index size() const noexcept { return n_; }
    double quantum() const noexcept { return quantum_; }
    std::span<const Index> neighbors(Index v) const;
    std::span<const std::int64_t> ticks(Index v) const;
    /// Quantized weight of the k-th neighbor of v, in model units.
    double weight(Index v, std::size_t k) const;

private:
    Index n_ = 0;
    double quantum_ = 1.0;
    std::vector<Index> ptr_;
    std::vector<Index> adj_;
    std::vector<std::int64_t> ticks_;
};

/// Source of exact rows of the distance matrix K.
class DistanceOracle {
public:
    virtual ~DistanceOracle() = default;
    virtual Index size() const = 0;
    /// Distances from vertex i to every vertex; +infinity where unreachable.
    virtual Vec row(Index i) const = 0;
};

/// Single-source shortest paths along mesh edges.
class EdgeDijkstraOracle final : public DistanceOracle {
public:
    explicit EdgeDijkstraOracle(EdgeGraph graph) : graph_(std::move(graph)) {}
    explicit EdgeDijkstraOracle(const TriMesh& mesh) : graph_(EdgeGraph::from_mesh(mesh)) {}

    Index size() const override { return graph_.size(); }
    Vec row(Index i) const override;
    const EdgeGraph& graph() const noexcept { return graph_; }

private:
    EdgeGraph graph_;
};

Vec distance_row(const DistanceOracle& oracle, Index i);

/// |rows| x n matrix of stacked distance rows, computed in parallel.
DenseMat distance_submatrix(const DistanceOracle& oracle, std::span<const Index> rows, unsigned threads = 1);

Index count_unreachable(const Vec& row);

} // namespace bha
