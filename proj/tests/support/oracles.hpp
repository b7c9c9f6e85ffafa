#pragma once

// Reference implementations for tests. Everything here is written with plain
// loops on purpose so that no decomposition is shared with the library.

#include "bha/mesh.hpp"
#include "bha/numerics/sparse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

using bha::DenseMat;
using bha::Index;
using bha::Vec;

inline DenseMat product(const DenseMat& a, const DenseMat& b) {
    DenseMat c = DenseMat::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (Index j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

/// Gaussian elimination with partial pivoting on [A | B].
inline DenseMat gauss_solve(DenseMat a, DenseMat b) {
    const Index n = a.rows();
    for (Index k = 0; k < n; ++k) {
        Index piv = k;
        for (Index i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k)))
                piv = i;
        if (a(piv, k) == 0.0)
            throw std::runtime_error("gauss_solve: singular");
        a.row(k).swap(a.row(piv));
        b.row(k).swap(b.row(piv));
        for (Index i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0)
                continue;
            for (Index j = k; j < n; ++j)
                a(i, j) -= f * a(k, j);
            for (Index j = 0; j < b.cols(); ++j)
                b(i, j) -= f * b(k, j);
        }
    }
    DenseMat x(n, b.cols());
    for (Index i = n - 1; i >= 0; --i)
        for (Index j = 0; j < b.cols(); ++j) {
            double s = b(i, j);
            for (Index k = i + 1; k < n; ++k)
                s -= a(i, k) * x(k, j);
            x(i, j) = s / a(i, i);
        }
    return x;
}

inline DenseMat inverse(const DenseMat& a) { return gauss_solve(a, DenseMat::Identity(a.rows(), a.cols())); }

struct Eig {
    Vec values; // descending
    DenseMat vectors;
};

/// Cyclic Jacobi rotations on a symmetric matrix.
inline Eig jacobi_eig(DenseMat a) {
    const Index n = a.rows();
    DenseMat v = DenseMat::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j)
                off += a(i, j) * a(i, j);
        if (off <= 1e-30 * std::max(1.0, a.squaredNorm()))
            break;
        for (Index p = 0; p < n; ++p)
            for (Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) > a(y, y); });
    Eig e{Vec(n), DenseMat(n, n)};
    for (Index k = 0; k < n; ++k) {
        e.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        e.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return e;
}

/// Pseudoinverse of a symmetric matrix from its eigendecomposition; singular
/// values of a symmetric matrix are the |eigenvalues|.
inline DenseMat pinv_sym(const DenseMat& s, double rcond) {
    const Eig e = jacobi_eig(s);
    const double smax = e.values.cwiseAbs().maxCoeff();
    DenseMat out = DenseMat::Zero(s.rows(), s.cols());
    if (smax == 0.0)
        return out;
    for (Index k = 0; k < e.values.size(); ++k) {
        if (std::abs(e.values[k]) <= rcond * smax)
            continue;
        out += e.vectors.col(k) * e.vectors.col(k).transpose() / e.values[k];
    }
    return out;
}

/// All-pairs shortest paths.
inline DenseMat floyd_warshall(Index n, const std::vector<std::tuple<Index, Index, double>>& edges) {
    const double inf = std::numeric_limits<double>::infinity();
    DenseMat d = DenseMat::Constant(n, n, inf);
    for (Index i = 0; i < n; ++i)
        d(i, i) = 0.0;
    for (const auto& [a, b, w] : edges) {
        d(a, b) = std::min(d(a, b), w);
        d(b, a) = std::min(d(b, a), w);
    }
    for (Index k = 0; k < n; ++k)
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (d(i, k) + d(k, j) < d(i, j))
                    d(i, j) = d(i, k) + d(k, j);
    return d;
}

inline std::vector<std::tuple<Index, Index, double>> mesh_edges(const bha::TriMesh& m) {
    std::vector<std::tuple<Index, Index, double>> e;
    for (const auto& edge : m.edges())
        e.emplace_back(edge.a, edge.b, edge.length);
    return e;
}

/// Farthest point sampling by re-scanning every chosen landmark for every
/// vertex. Values within `tie_tol` of the maximum count as ties; the lowest
/// index wins.
inline std::vector<Index> fps(const DenseMat& k, Index l, Index first, double tie_tol = 0.0) {
    const Index n = k.rows();
    std::vector<Index> chosen{first};
    while (static_cast<Index>(chosen.size()) < l) {
        std::vector<double> score(static_cast<std::size_t>(n), -1.0);
        double best = -1.0;
        for (Index j = 0; j < n; ++j) {
            if (std::find(chosen.begin(), chosen.end(), j) != chosen.end())
                continue;
            double m = std::numeric_limits<double>::infinity();
            for (Index c : chosen)
                m = std::min(m, k(c, j));
            score[static_cast<std::size_t>(j)] = m;
            best = std::max(best, m);
        }
        for (Index j = 0; j < n; ++j)
            if (score[static_cast<std::size_t>(j)] >= 0.0 && score[static_cast<std::size_t>(j)] >= best - tie_tol) {
                chosen.push_back(j);
                break;
            }
    }
    return chosen;
}

using P3 = std::array<double, 3>;

inline P3 sub(const P3& a, const P3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline double dot(const P3& a, const P3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline P3 cross(const P3& a, const P3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const P3& a) { return std::sqrt(dot(a, a)); }

inline P3 point(const bha::TriMesh& m, Index v) {
    return {m.vertices()(v, 0), m.vertices()(v, 1), m.vertices()(v, 2)};
}

/// Per-face accumulation: the angle at each corner adds half its cotangent
/// to the opposite edge.
inline DenseMat cotan_dense(const bha::TriMesh& m) {
    const Index n = m.num_vertices();
    DenseMat a = DenseMat::Zero(n, n);
    for (Index f = 0; f < m.num_faces(); ++f)
        for (int c = 0; c < 3; ++c) {
            const Index i = m.faces()(f, c);
            const Index j = m.faces()(f, (c + 1) % 3);
            const Index k = m.faces()(f, (c + 2) % 3);
            const P3 u = sub(point(m, j), point(m, i));
            const P3 v = sub(point(m, k), point(m, i));
            const double cot = dot(u, v) / norm(cross(u, v));
            a(j, k) += 0.5 * cot;
            a(k, j) += 0.5 * cot;
        }
    return a;
}

inline Vec mass_dense(const bha::TriMesh& m) {
    Vec d = Vec::Zero(m.num_vertices());
    for (Index f = 0; f < m.num_faces(); ++f) {
        const Index i = m.faces()(f, 0), j = m.faces()(f, 1), k = m.faces()(f, 2);
        const double area = 0.5 * norm(cross(sub(point(m, j), point(m, i)), sub(point(m, k), point(m, i))));
        d[i] += area / 3.0;
        d[j] += area / 3.0;
        d[k] += area / 3.0;
    }
    return d;
}

/// (V - A)^T diag(mass)^-1 (V - A) by dense products.
inline DenseMat biharmonic_dense(const DenseMat& a, const Vec& mass) {
    const Index n = a.rows();
    DenseMat l = -a;
    for (Index i = 0; i < n; ++i)
        l(i, i) += a.row(i).sum();
    DenseMat dinv = DenseMat::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        dinv(i, i) = 1.0 / mass[i];
    return product(product(l.transpose(), dinv), l);
}

/// Dense -M_uu^-1 M_ub with free rows ascending and landmark columns in order.
inline DenseMat interp_dense(const DenseMat& m, const std::vector<Index>& landmarks) {
    const Index n = m.rows();
    std::vector<Index> free;
    for (Index v = 0; v < n; ++v)
        if (std::find(landmarks.begin(), landmarks.end(), v) == landmarks.end())
            free.push_back(v);
    const auto nu = static_cast<Index>(free.size());
    const auto l = static_cast<Index>(landmarks.size());
    DenseMat uu(nu, nu), ub(nu, l);
    for (Index i = 0; i < nu; ++i) {
        for (Index j = 0; j < nu; ++j)
            uu(i, j) = m(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
        for (Index t = 0; t < l; ++t)
            ub(i, t) = m(free[static_cast<std::size_t>(i)], landmarks[static_cast<std::size_t>(t)]);
    }
    return -product(inverse(uu), ub);
}

/// Full n x l P assembled from a free block.
inline DenseMat full_p(Index n, const std::vector<Index>& landmarks, const DenseMat& pu) {
    DenseMat p = DenseMat::Zero(n, static_cast<Index>(landmarks.size()));
    Index r = 0;
    for (Index v = 0; v < n; ++v) {
        const auto it = std::find(landmarks.begin(), landmarks.end(), v);
        if (it != landmarks.end())
            p(v, it - landmarks.begin()) = 1.0;
        else
            p.row(v) = pu.row(r++);
    }
    return p;
}

inline DenseMat centering(Index n) {
    return DenseMat::Identity(n, n) - DenseMat::Constant(n, n, 1.0 / static_cast<double>(n));
}

inline DenseMat squared_euclidean(const DenseMat& x) {
    const Index n = x.rows();
    DenseMat e(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            e(i, j) = (x.row(i) - x.row(j)).squaredNorm();
    return e;
}

inline DenseMat pairwise(const DenseMat& z) {
    DenseMat d = squared_euclidean(z);
    return d.cwiseSqrt();
}

inline DenseMat random_matrix(Index r, Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseMat a(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i)
            a(i, j) = u(rng);
    return a;
}

inline double rel_diff(const DenseMat& a, const DenseMat& b) {
    const double s = std::max(a.norm(), b.norm());
    return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

} // namespace oracle
