#include "bha/geodesic.hpp"

#include "bha/errors.hpp"
#include "bha/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace bha {

EdgeGraph EdgeGraph::from_mesh(const TriMesh& mesh) {
    std::vector<std::tuple<Index, Index, double>> e;
    e.reserve(mesh.edges().size());
    for (const Edge& edge : mesh.edges())
        e.emplace_back(edge.a, edge.b, edge.length);
    return from_edges(mesh.num_vertices(), e);
}

EdgeGraph EdgeGraph::from_edges(Index n, std::span<const std::tuple<Index, Index, double>> edges) {
    EdgeGraph g;
    g.n_ = n;
    double wmax = 0.0;
    for (const auto& [a, b, w] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n || a == b)
            throw ValidationError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") is invalid");
        if (!(w > 0.0) || !std::isfinite(w))
            throw ValidationError("edge weights must be positive and finite");
        wmax = std::max(wmax, w);
    }
    // Longest edge gets `bits` significant bits; any path of < n edges stays
    // below 2^53 so the tick sums convert to double exactly.
    const int n_bits = n > 1 ? static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) : 1;
    const int bits = std::min(30, 52 - n_bits);
    if (wmax > 0.0)
        g.quantum_ = std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(wmax))) - bits);

    std::vector<std::vector<std::pair<Index, std::int64_t>>> lists(static_cast<std::size_t>(n));
    for (const auto& [a, b, w] : edges) {
        const auto t = std::max<std::int64_t>(1, std::llround(w / g.quantum_));
        lists[static_cast<std::size_t>(a)].emplace_back(b, t);
        lists[static_cast<std::size_t>(b)].emplace_back(a, t);
    }
    g.ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Index v = 0; v < n; ++v) {
        auto& l = lists[static_cast<std::size_t>(v)];
        std::sort(l.begin(), l.end());
        for (const auto& [u, t] : l) {
            g.adj_.push_back(u);
            g.ticks_.push_back(t);
        }
        g.ptr_[static_cast<std::size_t>(v) + 1] = static_cast<Index>(g.adj_.size());
    }
    return g;
}

std::span<const Index> EdgeGraph::neighbors(Index v) const {
    const auto b = static_cast<std::size_t>(ptr_[static_cast<std::size_t>(v)]);
    const auto e = static_cast<std::size_t>(ptr_[static_cast<std::size_t>(v) + 1]);
    return std::span<const Index>(adj_).subspan(b, e - b);
}

std::span<const std::int64_t> EdgeGraph::ticks(Index v) const {
    const auto b = static_cast<std::size_t>(ptr_[static_cast<std::size_t>(v)]);
    const auto e = static_cast<std::size_t>(ptr_[static_cast<std::size_t>(v) + 1]);
    return std::span<const std::int64_t>(ticks_).subspan(b, e - b);
}

double EdgeGraph::weight(Index v, std::size_t k) const {
    return static_cast<double>(ticks(v)[k]) * quantum_;
}

Vec EdgeDijkstraOracle::row(Index i) const {
    const Index n = graph_.size();
    if (i < 0 || i >= n)
        throw std::out_of_range("distance row index " + std::to_string(i) + " out of range");
    constexpr auto kInf = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int64_t> dist(static_cast<std::size_t>(n), kInf);
    using Item = std::pair<std::int64_t, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(i)] = 0;
    heap.emplace(0, i);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d != dist[static_cast<std::size_t>(v)])
            continue;
        const auto nb = graph_.neighbors(v);
        const auto tk = graph_.ticks(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const std::int64_t cand = d + tk[k];
            auto& slot = dist[static_cast<std::size_t>(nb[k])];
            if (cand < slot) {
                slot = cand;
                heap.emplace(cand, nb[k]);
            }
        }
    }
    Vec out(n);
    for (Index v = 0; v < n; ++v) {
        const auto d = dist[static_cast<std::size_t>(v)];
        out[v] = d == kInf ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(d) * graph_.quantum();
    }
    return out;
}

Vec distance_row(const DistanceOracle& oracle, Index i) {
    if (i < 0 || i >= oracle.size())
        throw std::out_of_range("distance row index " + std::to_string(i) + " out of range");
    return oracle.row(i);
}

DenseMat distance_submatrix(const DistanceOracle& oracle, std::span<const Index> rows, unsigned threads) {
    DenseMat out(static_cast<Index>(rows.size()), oracle.size());
    for (Index r : rows)
        if (r < 0 || r >= oracle.size())
            throw std::out_of_range("distance row index " + std::to_string(r) + " out of range");
    parallel_for(rows.size(), threads, [&](std::size_t k) {
        out.row(static_cast<Index>(k)) = oracle.row(rows[k]).transpose();
    });
    return out;
}

Index count_unreachable(const Vec& row) {
    return static_cast<Index>((row.array() == std::numeric_limits<double>::infinity()).count());
}

} // namespace bha
