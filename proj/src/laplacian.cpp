#include "bha/laplacian.hpp"

#include "bha/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bha {

SparseSym cotan_adjacency(const TriMesh& mesh) {
    const auto& v = mesh.vertices();
    const auto& f = mesh.faces();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(f.rows()) * 6);
    for (Index face = 0; face < f.rows(); ++face) {
        for (int corner = 0; corner < 3; ++corner) {
            const Index o = f(face, corner);
            const Index i = f(face, (corner + 1) % 3);
            const Index j = f(face, (corner + 2) % 3);
            const Eigen::Vector3d e1 = v.row(i) - v.row(o);
            const Eigen::Vector3d e2 = v.row(j) - v.row(o);
            const double cot = e1.dot(e2) / e1.cross(e2).norm();
            if (!std::isfinite(cot))
                throw DegenerateFace("face " + std::to_string(face) + " has a non-finite cotangent");
            t.push_back({i, j, 0.5 * cot});
            t.push_back({j, i, 0.5 * cot});
        }
    }
    return SparseSym::from_triplets(mesh.num_vertices(), std::move(t));
}

Vec lumped_mass(const TriMesh& mesh) {
    Vec d = Vec::Zero(mesh.num_vertices());
    for (Index face = 0; face < mesh.num_faces(); ++face) {
        const double third = mesh.face_area(face) / 3.0;
        for (int k = 0; k < 3; ++k)
            d[mesh.faces()(face, k)] += third;
    }
    return d;
}

namespace {

Vec row_sums(const SparseSym& a) {
    Vec s(a.size());
    for (Index i = 0; i < a.size(); ++i) {
        double acc = 0.0;
        for (double w : a.row_values(i))
            acc += w;
        s[i] = acc;
    }
    return s;
}

/// L = V - A with V the row sums of A.
SparseSym graph_laplacian(const SparseSym& a, const Vec& weight_sum) {
    const Index n = a.size();
    std::vector<Index> rp(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> ci;
    std::vector<double> vals;
    ci.reserve(static_cast<std::size_t>(a.nnz() + n));
    vals.reserve(static_cast<std::size_t>(a.nnz() + n));
    for (Index i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto w = a.row_values(i);
        bool diag_done = weight_sum[i] == 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i)
                throw ValidationError("adjacency has a self-loop at vertex " + std::to_string(i));
            if (!diag_done && cols[k] > i) {
                ci.push_back(i);
                vals.push_back(weight_sum[i]);
                diag_done = true;
            }
            ci.push_back(cols[k]);
            vals.push_back(-w[k]);
        }
        if (!diag_done) {
            ci.push_back(i);
            vals.push_back(weight_sum[i]);
        }
        rp[static_cast<std::size_t>(i) + 1] = static_cast<Index>(ci.size());
    }
    return SparseSym::from_csr(n, std::move(rp), std::move(ci), std::move(vals));
}

/// M = L^T diag(mass)^-1 L. Each entry sums its k-terms in ascending k, and
/// the (i,j) and (j,i) terms are the same products, so M is bit-symmetric.
SparseSym weighted_square(const SparseSym& l, const Vec& mass) {
    const Index n = l.size();
    std::vector<Index> rp(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> ci;
    std::vector<double> vals;
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<Index> mark(static_cast<std::size_t>(n), -1);
    std::vector<Index> touched;
    for (Index i = 0; i < n; ++i) {
        touched.clear();
        const auto ks = l.row_cols(i);
        const auto lik = l.row_values(i);
        for (std::size_t a = 0; a < ks.size(); ++a) {
            const Index k = ks[a];
            const auto js = l.row_cols(k);
            const auto lkj = l.row_values(k);
            for (std::size_t b = 0; b < js.size(); ++b) {
                const auto j = static_cast<std::size_t>(js[b]);
                if (mark[j] != i) {
                    mark[j] = i;
                    acc[j] = 0.0;
                    touched.push_back(js[b]);
                }
                acc[j] += (lik[a] * lkj[b]) / mass[k];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (Index j : touched) {
            if (acc[static_cast<std::size_t>(j)] != 0.0) {
                ci.push_back(j);
                vals.push_back(acc[static_cast<std::size_t>(j)]);
            }
        }
        rp[static_cast<std::size_t>(i) + 1] = static_cast<Index>(ci.size());
    }
    return SparseSym::from_csr(n, std::move(rp), std::move(ci), std::move(vals));
}

} // namespace

LaplacianParts laplacian_parts(const TriMesh& mesh) {
    LaplacianParts p;
    p.mass = lumped_mass(mesh);
    p.adjacency = cotan_adjacency(mesh);
    p.weight_sum = row_sums(p.adjacency);
    return p;
}

BiharmonicOp biharmonic_operator(const LaplacianParts& parts) {
    const Index n = parts.adjacency.size();
    if (parts.mass.size() != n || parts.weight_sum.size() != n)
        throw DimensionMismatch("biharmonic_operator: part sizes disagree");
    for (Index i = 0; i < n; ++i)
        if (!(parts.mass[i] > 0.0))
            throw ZeroMass("vertex " + std::to_string(i) + " has non-positive lumped mass");
    return BiharmonicOp(weighted_square(graph_laplacian(parts.adjacency, parts.weight_sum), parts.mass));
}

BiharmonicOp graph_biharmonic(const SparseSym& adjacency) {
    for (double w : adjacency.values())
        if (w != 1.0)
            throw ValidationError("graph adjacency must be 0/1");
    LaplacianParts parts;
    parts.adjacency = adjacency;
    parts.weight_sum = row_sums(adjacency);
    parts.mass = Vec::Ones(adjacency.size());
    return biharmonic_operator(parts);
}

BlockPartition::BlockPartition(Index n, std::span<const Index> landmarks)
    : n_(n), landmarks_(landmarks.begin(), landmarks.end()),
      is_landmark_(static_cast<std::size_t>(n), 0), local_(static_cast<std::size_t>(n), -1) {
    for (std::size_t t = 0; t < landmarks_.size(); ++t) {
        const Index v = landmarks_[t];
        if (v < 0 || v >= n)
            throw std::out_of_range("landmark index " + std::to_string(v) + " out of range");
        if (is_landmark_[static_cast<std::size_t>(v)])
            throw std::invalid_argument("duplicate landmark " + std::to_string(v));
        is_landmark_[static_cast<std::size_t>(v)] = 1;
        local_[static_cast<std::size_t>(v)] = static_cast<Index>(t);
    }
    free_.reserve(static_cast<std::size_t>(n) - landmarks_.size());
    for (Index v = 0; v < n; ++v) {
        if (!is_landmark_[static_cast<std::size_t>(v)]) {
            local_[static_cast<std::size_t>(v)] = static_cast<Index>(free_.size());
            free_.push_back(v);
        }
    }
}

SparseSym BiharmonicOp::uu_block(const BlockPartition& part) const {
    const auto nu = static_cast<Index>(part.free().size());
    std::vector<Index> rp(static_cast<std::size_t>(nu) + 1, 0);
    std::vector<Index> ci;
    std::vector<double> vals;
    for (Index s = 0; s < nu; ++s) {
        const Index v = part.free()[static_cast<std::size_t>(s)];
        const auto cols = m_.row_cols(v);
        const auto w = m_.row_values(v);
        // Free vertices are ascending, so local order matches global order.
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (!part.is_landmark(cols[k])) {
                ci.push_back(part.local(cols[k]));
                vals.push_back(w[k]);
            }
        }
        rp[static_cast<std::size_t>(s) + 1] = static_cast<Index>(ci.size());
    }
    return SparseSym::from_csr(nu, std::move(rp), std::move(ci), std::move(vals));
}

SparseRect BiharmonicOp::ub_block(const BlockPartition& part) const {
    const auto nu = static_cast<Index>(part.free().size());
    const auto nb = static_cast<Index>(part.landmarks().size());
    SparseRect r(nu, nb);
    std::vector<Index> rows;
    std::vector<double> vals;
    for (Index t = 0; t < nb; ++t) {
        // Column t of M_ub = row b_t of M restricted to free vertices (symmetry).
        const Index b = part.landmarks()[static_cast<std::size_t>(t)];
        rows.clear();
        vals.clear();
        const auto cols = m_.row_cols(b);
        const auto w = m_.row_values(b);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (!part.is_landmark(cols[k])) {
                rows.push_back(part.local(cols[k]));
                vals.push_back(w[k]);
            }
        }
        r.append_column(rows, vals);
    }
    return r;
}

SparseRect BiharmonicOp::bu_block(const BlockPartition& part) const {
    const auto nu = static_cast<Index>(part.free().size());
    const auto nb = static_cast<Index>(part.landmarks().size());
    SparseRect r(nb, nu);
    std::vector<std::pair<Index, double>> entries;
    std::vector<Index> rows;
    std::vector<double> vals;
    for (Index s = 0; s < nu; ++s) {
        const Index u = part.free()[static_cast<std::size_t>(s)];
        entries.clear();
        const auto cols = m_.row_cols(u);
        const auto w = m_.row_values(u);
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (part.is_landmark(cols[k]))
                entries.emplace_back(part.local(cols[k]), w[k]);
        std::sort(entries.begin(), entries.end());
        rows.clear();
        vals.clear();
        for (const auto& [row, val] : entries) {
            rows.push_back(row);
            vals.push_back(val);
        }
        r.append_column(rows, vals);
    }
    return r;
}

DenseMat BiharmonicOp::bb_block(const BlockPartition& part) const {
    const auto nb = static_cast<Index>(part.landmarks().size());
    DenseMat out = DenseMat::Zero(nb, nb);
    for (Index t = 0; t < nb; ++t) {
        const Index b = part.landmarks()[static_cast<std::size_t>(t)];
        const auto cols = m_.row_cols(b);
        const auto w = m_.row_values(b);
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (part.is_landmark(cols[k]))
                out(t, part.local(cols[k])) = w[k];
    }
    return out;
}

} // namespace bha
