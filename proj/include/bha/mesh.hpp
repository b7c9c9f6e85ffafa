#pragma once

#include "bha/numerics/sparse.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bha {

using VertexMat = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using FaceMat = Eigen::Matrix<Index, Eigen::Dynamic, 3>;
using Rgb = std::array<std::uint8_t, 3>;

struct Edge {
    Index a; ///< a < b
    Index b;
    double length;
};

struct MeshOptions {
    /// Drop zero-area faces (with a report entry) instead of rejecting the mesh.
    bool drop_degenerate = false;
    /// A face is degenerate when twice its area is <= eps * (longest edge)^2.
    double degenerate_eps = 1e-14;
};

struct MeshReport {
    std::vector<Index> dropped_faces;    ///< indices into the input face list
    std::vector<Index> removed_vertices; ///< input indices of isolated vertices
    /// input vertex index -> output index, or -1 when removed
    std::vector<Index> vertex_remap;
};

/// Validated triangle mesh. Immutable after construction.
class TriMesh {
public:
    /// Validates and derives edge structure. Isolated vertices are removed and
    /// reported through `report`.
    static TriMesh build(VertexMat vertices, FaceMat faces, const MeshOptions& opts = {},
                         MeshReport* report = nullptr);

    Index num_vertices() const noexcept { return vertices_.rows(); }
    Index num_faces() const noexcept { return faces_.rows(); }
    Index num_edges() const noexcept { return static_cast<Index>(edges_.size()); }

    const VertexMat& vertices() const noexcept { return vertices_; }
    const FaceMat& faces() const noexcept { return faces_; }
    /// Sorted by (a, b).
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    /// Number of faces sharing each edge (1 = boundary, 2 = interior).
    const std::vector<int>& edge_face_counts() const noexcept { return edge_faces_; }
    std::span<const Index> incident_faces(Index v) const;

    double face_area(Index f) const;
    double total_area() const;

private:
    VertexMat vertices_;
    FaceMat faces_;
    std::vector<Edge> edges_;
    std::vector<int> edge_faces_;
    std::vector<Index> vf_ptr_;
    std::vector<Index> vf_idx_;
};

struct MeshStats {
    Index n_vertices = 0;
    Index n_faces = 0;
    Index n_edges = 0;
    Index max_vertex_degree = 0;
    Index boundary_edge_count = 0;
    double min_triangle_area = 0.0;

    bool operator==(const MeshStats&) const = default;
};

MeshStats mesh_stats(const TriMesh& mesh);

enum class MeshFormat { off, ply_ascii };

TriMesh parse_mesh(std::string_view text, MeshFormat format, const MeshOptions& opts = {},
                   MeshReport* report = nullptr);

/// Format from the file extension (.off / .ply).
TriMesh load_mesh(const std::filesystem::path& path, const MeshOptions& opts = {},
                  MeshReport* report = nullptr);
MeshFormat format_from_path(const std::filesystem::path& path);

/// Icosahedron subdivided `subdivisions` times, projected onto the unit sphere.
TriMesh make_sphere_mesh(int subdivisions);

/// Shortest round-trip decimal representation of every coordinate.
std::string write_off(const TriMesh& mesh);
std::string write_ply(const TriMesh& mesh, std::span<const Rgb> colors = {});

} // namespace bha
