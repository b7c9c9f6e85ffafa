#include "bha/errors.hpp"
#include "bha/mesh.hpp"
#include "support/meshes.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace bha;

namespace {

const char* kTetraOff = R"(OFF
# regular tetrahedron
4 4 0
1 1 1
1 -1 -1
-1 1 -1
-1 -1 1
3 0 1 2
3 0 3 1
3 0 2 3
3 1 3 2
)";

} // namespace

TEST_SUITE("mesh") {

TEST_CASE("OFF tetrahedron counts") {
    const TriMesh m = parse_mesh(kTetraOff, MeshFormat::off);
    CHECK(m.num_vertices() == 4);
    CHECK(m.num_faces() == 4);
    CHECK(m.num_edges() == 6);
}

TEST_CASE("OFF with fewer vertex lines than declared fails on the offending line") {
    const char* text = "OFF\n5 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n";
    try {
        (void)parse_mesh(text, MeshFormat::off);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
    }
}

TEST_CASE("OFF face with an out-of-range index") {
    const char* text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n";
    CHECK_THROWS_AS(parse_mesh(text, MeshFormat::off), ValidationError);
}

TEST_CASE("OFF rejects a non-triangular face") {
    const char* text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
    CHECK_THROWS_AS(parse_mesh(text, MeshFormat::off), ParseError);
}

TEST_CASE("PLY single right triangle edge lengths") {
    const char* text = R"(ply
format ascii 1.0
element vertex 3
property float x
property float y
property float z
element face 1
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
0 1 0
3 0 1 2
)";
    const TriMesh m = parse_mesh(text, MeshFormat::ply_ascii);
    std::multiset<double> lengths;
    for (const Edge& e : m.edges())
        lengths.insert(e.length);
    CHECK(lengths == std::multiset<double>{1.0, 1.0, std::sqrt(2.0)});
}

TEST_CASE("PLY binary is rejected") {
    const char* text = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
    CHECK_THROWS_AS(parse_mesh(text, MeshFormat::ply_ascii), ParseError);
}

TEST_CASE("degenerate faces are rejected or dropped") {
    VertexMat v(4, 3);
    v << 0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 1, 0;
    FaceMat f(2, 3);
    f << 0, 1, 2, 0, 1, 3;
    CHECK_THROWS_AS(TriMesh::build(v, f), ValidationError);
    MeshOptions opts;
    opts.drop_degenerate = true;
    MeshReport rep;
    const TriMesh m = TriMesh::build(v, f, opts, &rep);
    CHECK(rep.dropped_faces == std::vector<Index>{0});
    // Vertex 2 only belonged to the dropped face.
    CHECK(rep.removed_vertices == std::vector<Index>{2});
    CHECK(rep.vertex_remap == std::vector<Index>{0, 1, -1, 2});
    CHECK(m.num_vertices() == 3);
}

TEST_CASE("isolated vertices are removed with a remap") {
    VertexMat v(5, 3);
    v << 9, 9, 9, 0, 0, 0, 1, 0, 0, 7, 7, 7, 0, 1, 0;
    FaceMat f(1, 3);
    f << 1, 2, 4;
    MeshReport rep;
    const TriMesh m = TriMesh::build(v, f, {}, &rep);
    CHECK(m.num_vertices() == 3);
    CHECK(rep.removed_vertices == std::vector<Index>{0, 3});
    CHECK(rep.vertex_remap == std::vector<Index>{-1, 0, 1, -1, 2});
    CHECK(m.faces()(0, 2) == 2);
}

TEST_CASE("non-manifold edge is rejected") {
    VertexMat v(5, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1;
    FaceMat f(3, 3);
    f << 0, 1, 2, 0, 1, 3, 0, 1, 4;
    CHECK_THROWS_AS(TriMesh::build(v, f), ValidationError);
}

TEST_CASE("icosphere vertex counts") {
    CHECK(make_sphere_mesh(0).num_vertices() == 12);
    CHECK(make_sphere_mesh(0).num_faces() == 20);
    CHECK(make_sphere_mesh(2).num_vertices() == 162);
    const TriMesh s4 = make_sphere_mesh(4);
    CHECK(s4.num_vertices() == 2562);
    CHECK(s4.num_vertices() - s4.num_edges() + s4.num_faces() == 2);
    for (int s = 0; s <= 3; ++s) {
        const TriMesh m = make_sphere_mesh(s);
        CHECK(m.num_vertices() == 10 * (Index{1} << (2 * s)) + 2);
        CHECK(mesh_stats(m).boundary_edge_count == 0);
        for (Index v = 0; v < m.num_vertices(); ++v)
            CHECK(m.vertices().row(v).norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("mesh stats") {
    const MeshStats t = mesh_stats(testmesh::tetrahedron());
    CHECK(t.max_vertex_degree == 3);
    CHECK(t.boundary_edge_count == 0);
    const MeshStats tri = mesh_stats(testmesh::equilateral());
    CHECK(tri.boundary_edge_count == 3);
    CHECK(mesh_stats(make_sphere_mesh(1)).min_triangle_area > 0.0);
}

TEST_CASE("every edge of a closed mesh has two faces") {
    const TriMesh m = make_sphere_mesh(2);
    for (int c : m.edge_face_counts())
        CHECK(c == 2);
}

TEST_CASE("OFF and PLY writers round trip exactly") {
    const TriMesh m = testmesh::grid(6, 5, 0.3, 4);
    for (MeshFormat fmt : {MeshFormat::off, MeshFormat::ply_ascii}) {
        const TriMesh back = parse_mesh(fmt == MeshFormat::off ? write_off(m) : write_ply(m), fmt);
        CHECK(back.vertices() == m.vertices());
        CHECK(back.faces() == m.faces());
    }
}

TEST_CASE("PLY writer emits per-vertex colors") {
    const TriMesh m = testmesh::equilateral();
    const std::vector<Rgb> colors{Rgb{255, 0, 0}, Rgb{0, 255, 0}, Rgb{0, 0, 255}};
    const std::string text = write_ply(m, colors);
    CHECK(text.find("property uchar red") != std::string::npos);
    CHECK(text.find(" 0 0 255\n") != std::string::npos);
    CHECK(parse_mesh(text, MeshFormat::ply_ascii).vertices() == m.vertices());
}

TEST_CASE("format from path") {
    CHECK(format_from_path("a/b.OFF") == MeshFormat::off);
    CHECK(format_from_path("x.ply") == MeshFormat::ply_ascii);
    CHECK_THROWS(format_from_path("x.obj"));
}

}
