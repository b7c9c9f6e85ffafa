#pragma once

#include "bha/mesh.hpp"

#include <cmath>
#include <random>

namespace testmesh {

using bha::FaceMat;
using bha::Index;
using bha::TriMesh;
using bha::VertexMat;

inline TriMesh tetrahedron() {
    VertexMat v(4, 3);
    v << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
    FaceMat f(4, 3);
    f << 0, 1, 2, 0, 3, 1, 0, 2, 3, 1, 3, 2;
    return TriMesh::build(v, f);
}

inline TriMesh equilateral() {
    VertexMat v(3, 3);
    v << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2.0, 0;
    FaceMat f(1, 3);
    f << 0, 1, 2;
    return TriMesh::build(v, f);
}

/// Unit square split along the (0,0)-(1,1) diagonal.
inline TriMesh unit_square() {
    VertexMat v(4, 3);
    v << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
    FaceMat f(2, 3);
    f << 0, 1, 2, 0, 2, 3;
    return TriMesh::build(v, f);
}

/// nx x ny vertex grid on [0,1]^2 with alternating diagonals. With jitter > 0
/// interior vertices move randomly, which produces obtuse triangles.
inline TriMesh grid(Index nx, Index ny, double jitter = 0.0, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VertexMat v(nx * ny, 3);
    const double hx = 1.0 / static_cast<double>(nx - 1);
    const double hy = 1.0 / static_cast<double>(ny - 1);
    for (Index j = 0; j < ny; ++j)
        for (Index i = 0; i < nx; ++i) {
            double x = static_cast<double>(i) * hx, y = static_cast<double>(j) * hy;
            if (i > 0 && j > 0 && i + 1 < nx && j + 1 < ny) {
                x += jitter * hx * u(rng);
                y += jitter * hy * u(rng);
            }
            v.row(j * nx + i) << x, y, 0.1 * std::sin(3.0 * x) * std::cos(2.0 * y);
        }
    FaceMat f(2 * (nx - 1) * (ny - 1), 3);
    Index k = 0;
    for (Index j = 0; j + 1 < ny; ++j)
        for (Index i = 0; i + 1 < nx; ++i) {
            const Index a = j * nx + i, b = a + 1, c = a + nx, d = c + 1;
            if ((i + j) % 2 == 0) {
                f.row(k++) << a, b, d;
                f.row(k++) << a, d, c;
            } else {
                f.row(k++) << a, b, c;
                f.row(k++) << b, d, c;
            }
        }
    return TriMesh::build(v, f);
}

} // namespace testmesh
