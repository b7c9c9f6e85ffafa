#include "bha/approx.hpp"
#include "bha/errors.hpp"
#include "bha/mds.hpp"
#include "support/meshes.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <numeric>

using namespace bha;

namespace {

std::vector<Index> iota(Index n) {
    std::vector<Index> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

struct Fixture {
    TriMesh mesh;
    EdgeDijkstraOracle oracle;
    BiharmonicOp m;
    DenseMat k;

    explicit Fixture(TriMesh mesh_)
        : mesh(std::move(mesh_)), oracle(mesh), m(biharmonic_operator(laplacian_parts(mesh))),
          k(distance_submatrix(oracle, iota(mesh.num_vertices()))) {}
};

EdgeDijkstraOracle path_oracle(Index n) {
    std::vector<std::tuple<Index, Index, double>> edges;
    for (Index i = 0; i + 1 < n; ++i)
        edges.emplace_back(i, i + 1, 1.0);
    return EdgeDijkstraOracle(EdgeGraph::from_edges(n, edges));
}

} // namespace

TEST_SUITE("approx") {

TEST_CASE("farthest points on a five point path") {
    const LandmarkSet s = select_landmarks(path_oracle(5), 3, FirstLandmark::fixed(0));
    CHECK(s.indices == std::vector<Index>{0, 4, 2});
    DenseMat k(5, 5);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j)
            k(i, j) = static_cast<double>(std::abs(i - j));
    CHECK(oracle::fps(k, 3, 0) == s.indices);
}

TEST_CASE("farthest points agree with brute force on a sphere") {
    const Fixture f(make_sphere_mesh(2));
    for (Index first : {Index{0}, Index{57}, Index{161}}) {
        const LandmarkSet s = select_landmarks(f.oracle, 20, FirstLandmark::fixed(first));
        CHECK(oracle::fps(f.k, 20, first) == s.indices);
        for (Index t = 0; t < s.size(); ++t)
            CHECK(s.rows.row(t) == f.k.row(s.indices[static_cast<std::size_t>(t)]));
        CHECK(s.min_dist.transpose() == s.rows.colwise().minCoeff());
    }
}

TEST_CASE("landmark set edge cases") {
    const EdgeDijkstraOracle o = path_oracle(6);
    const LandmarkSet one = select_landmarks(o, 1, FirstLandmark::fixed(3));
    CHECK(one.indices == std::vector<Index>{3});
    CHECK(one.min_dist == o.row(3));
    const LandmarkSet all = select_landmarks(o, 6, FirstLandmark::fixed(0));
    std::vector<Index> sorted = all.indices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == iota(6));
    CHECK_THROWS(select_landmarks(o, 7));
    CHECK_THROWS(select_landmarks(o, 0));
}

TEST_CASE("landmark selection is deterministic and seeded") {
    const EdgeDijkstraOracle o(make_sphere_mesh(2));
    CHECK(select_landmarks(o, 10).indices == select_landmarks(o, 10).indices);
    const auto a = select_landmarks(o, 10, FirstLandmark::random(5)).indices;
    CHECK(a == select_landmarks(o, 10, FirstLandmark::random(5)).indices);
}

TEST_CASE("disconnected graphs cannot be covered") {
    std::vector<std::tuple<Index, Index, double>> edges{{0, 1, 1.0}, {2, 3, 1.0}};
    const EdgeDijkstraOracle o(EdgeGraph::from_edges(4, edges));
    CHECK_THROWS_AS(select_landmarks(o, 2), Disconnected);
}

TEST_CASE("column budget") {
    CHECK(column_budget(100, 20, 10.0) == 40);
    CHECK(column_budget(100, 20, 1000.0) == 80);
    CHECK(column_budget(100, 20, 1e-9) == 1);
    CHECK(column_budget(1804693, 50000, 50.0) == 1755);
}

TEST_CASE("interpolation operator matches the dense inverse oracle") {
    for (const TriMesh& mesh : {make_sphere_mesh(2), testmesh::grid(12, 11, 0.4, 6)}) {
        const Fixture f(mesh);
        const LandmarkSet s = select_landmarks(f.oracle, 12);
        const InterpOperator p = interpolation_operator(f.m, s.indices);
        const DenseMat ref = oracle::interp_dense(f.m.matrix().to_dense(), s.indices);
        CHECK((p.dense_block() - ref).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("interpolation reproduces constants and keeps identity rows") {
    const Fixture f(make_sphere_mesh(3));
    const LandmarkSet s = select_landmarks(f.oracle, 64);
    const InterpOperator p = interpolation_operator(f.m, s.indices);
    const DenseMat full = p.to_dense();
    CHECK((full.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);
    for (Index t = 0; t < 64; ++t) {
        const Vec r = p.row(s.indices[static_cast<std::size_t>(t)]);
        CHECK(r == Vec::Unit(64, t));
    }
}

TEST_CASE("every vertex as a landmark gives the identity") {
    const Fixture f(make_sphere_mesh(0));
    const LandmarkSet s = select_landmarks(f.oracle, 12);
    const InterpOperator p = interpolation_operator(f.m, s.indices);
    DenseMat perm = DenseMat::Zero(12, 12);
    for (Index t = 0; t < 12; ++t)
        perm(s.indices[static_cast<std::size_t>(t)], t) = 1.0;
    CHECK(p.to_dense() == perm);
    const BhaApprox a = bha::bha(p, s, false);
    CHECK(evaluate_rows(a, iota(12)) == f.k);
}

TEST_CASE("thresholding keeps the largest magnitudes") {
    DenseMat pu(4, 1);
    pu << 0.5, -0.4, 0.05, 0.05;
    const InterpOperator dense = InterpOperator::make_dense(5, {4}, pu);
    // n - l = 4, l = 1: p_row = 0.5 gives p = 2.
    const InterpOperator sp = sparsify_operator(dense, 0.5);
    const SparseRect& s = sp.sparse_block();
    CHECK(std::vector<Index>(s.column_rows(0).begin(), s.column_rows(0).end()) == std::vector<Index>{0, 1});
    CHECK(std::vector<double>(s.column_values(0).begin(), s.column_values(0).end()) ==
          std::vector<double>{0.5, -0.4});
}

TEST_CASE("thresholding ties go to the lower row") {
    DenseMat pu(4, 1);
    pu << 0.05, 0.5, 0.05, -0.05;
    const InterpOperator dense = InterpOperator::make_dense(5, {0}, pu);
    const InterpOperator sp = sparsify_operator(dense, 0.5);
    const auto rows = sp.sparse_block().column_rows(0);
    CHECK(std::vector<Index>(rows.begin(), rows.end()) == std::vector<Index>{0, 1});
}

TEST_CASE("sparsification budget and exactness") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 20);
    const InterpOperator dense = interpolation_operator(f.m, s.indices);
    const Index nu = 162 - 20;
    for (double p_row : {1.0, 5.0, 10.0}) {
        const InterpOperator sp = sparsify_operator(dense, p_row);
        const Index p = column_budget(162, 20, p_row);
        CHECK(sp.max_column_entries() <= p);
        for (Index t = 0; t < 20; ++t) {
            const Vec r = sp.row(s.indices[static_cast<std::size_t>(t)]);
            CHECK(r == Vec::Unit(20, t));
        }
        CHECK(sp.stored_entries() <= p * 20);
    }
    const InterpOperator keep_all = sparsify_operator(dense, static_cast<double>(nu));
    CHECK(keep_all.sparse_block().to_dense() == dense.dense_block());
}

TEST_CASE("fused sparse construction equals sparsify after dense") {
    const Fixture f(testmesh::grid(14, 12, 0.3, 8));
    const LandmarkSet s = select_landmarks(f.oracle, 15);
    const InterpOperator dense = interpolation_operator(f.m, s.indices);
    SolveConfig cfg;
    cfg.threads = 3;
    const InterpOperator fused = sparse_interpolation_operator(f.m, s.indices, 6.0, cfg);
    CHECK(fused.sparse_block() == sparsify_operator(dense, 6.0).sparse_block());
}

TEST_CASE("factored approximation reproduces W on landmark pairs") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 25);
    const InterpOperator dense = interpolation_operator(f.m, s.indices);
    for (const InterpOperator& p : {dense, sparsify_operator(dense, 4.0)}) {
        const BhaApprox a = bha::bha(p, s, false);
        for (Index i = 0; i < 25; ++i)
            for (Index j = 0; j < 25; ++j)
                CHECK(evaluate_entry(a, s.indices[static_cast<std::size_t>(i)], s.indices[static_cast<std::size_t>(j)]) ==
                      a.w(i, j));
        for (Index i = 0; i < 25; ++i) {
            CHECK(a.w(i, i) == 0.0);
            for (Index j = 0; j < 25; ++j)
                CHECK(a.w(i, j) == a.w(j, i));
        }
    }
}

TEST_CASE("approximation is symmetric") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 20);
    const BhaApprox a = bha::bha(interpolation_operator(f.m, s.indices), s, false);
    const DenseMat full = evaluate_rows(a, iota(162));
    CHECK((full - full.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * full.cwiseAbs().maxCoeff());
}

TEST_CASE("row evaluation matches the dense triple product") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 30);
    const InterpOperator dense = interpolation_operator(f.m, s.indices);
    for (const InterpOperator& p : {dense, sparsify_operator(dense, 8.0)}) {
        const BhaApprox a = bha::bha(p, s, true);
        const DenseMat pd = p.to_dense();
        const DenseMat ref = oracle::product(oracle::product(pd, a.w), pd.transpose());
        const std::vector<Index> rows{0, 17, 161, s.indices[3]};
        const DenseMat got = evaluate_rows(a, rows);
        for (std::size_t r = 0; r < rows.size(); ++r)
            CHECK((got.row(static_cast<Index>(r)) - ref.row(rows[r])).cwiseAbs().maxCoeff() <=
                  1e-10 * ref.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("row at a landmark equals the column of P W") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 15);
    const BhaApprox a = bha::bha(interpolation_operator(f.m, s.indices), s, false);
    const std::vector<Index> rows{s.indices[4]};
    const DenseMat pw = a.p.to_dense() * a.w;
    CHECK((evaluate_rows(a, rows).row(0).transpose() - pw.col(4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity interpolation returns W") {
    const EdgeDijkstraOracle o = path_oracle(5);
    const LandmarkSet s = select_landmarks(o, 5);
    const DenseMat eye = DenseMat::Identity(5, 5);
    DenseMat perm = DenseMat::Zero(0, 5);
    const BhaApprox a = bha::bha(InterpOperator::make_dense(5, s.indices, perm), s, false);
    const DenseMat rows = evaluate_rows(a, iota(5));
    DenseMat k(5, 5);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j)
            k(i, j) = static_cast<double>(std::abs(i - j));
    CHECK(rows == k);
    (void)eye;
}

TEST_CASE("more landmarks reduce the error") {
    const Fixture f(make_sphere_mesh(2));
    auto eps = [&](Index l) {
        const LandmarkSet s = select_landmarks(f.oracle, l);
        return relative_error(bha::bha(interpolation_operator(f.m, s.indices), s, false), f.k).epsilon;
    };
    CHECK(eps(40) < eps(12));
}

TEST_CASE("Nystrom matches the dense pseudoinverse oracle") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 30);
    const NystromApprox ny = nystrom(s);
    DenseMat w(30, 30);
    for (Index i = 0; i < 30; ++i)
        for (Index j = 0; j < 30; ++j)
            w(i, j) = f.k(s.indices[static_cast<std::size_t>(i)], s.indices[static_cast<std::size_t>(j)]);
    const DenseMat c = s.rows.transpose();
    const DenseMat ref = oracle::product(oracle::product(c, oracle::pinv_sym(w, 1e-12)), c.transpose());
    const DenseMat got = evaluate_rows(ny, iota(162));
    CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-8 * ref.cwiseAbs().maxCoeff());
    CHECK(ny.conditioning > 0.0);
    CHECK(ny.rank == 30);
    for (Index t = 0; t < 30; ++t)
        CHECK(ny.c.row(s.indices[static_cast<std::size_t>(t)]) == w.row(t));
}

TEST_CASE("Nystrom with a single landmark is zero") {
    const Fixture f(make_sphere_mesh(1));
    const LandmarkSet s = select_landmarks(f.oracle, 1);
    const NystromApprox ny = nystrom(s);
    CHECK(ny.w_pinv.norm() == 0.0);
    CHECK(evaluate_rows(ny, iota(42)).norm() == 0.0);
}

TEST_CASE("Nystrom with every vertex reproduces K") {
    const Fixture f(make_sphere_mesh(0));
    const LandmarkSet s = select_landmarks(f.oracle, 12);
    const NystromApprox ny = nystrom(s);
    CHECK((evaluate_rows(ny, iota(12)) - f.k).cwiseAbs().maxCoeff() < 1e-10 * f.k.maxCoeff());
}

TEST_CASE("FMDS transform matches the dense oracle") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 12);
    const InterpOperator p = interpolation_operator(f.m, s.indices);
    const DenseMat h = fmds_operator(p, f.m, FmdsConfig{50.0});
    const DenseMat m = f.m.matrix().to_dense();
    const DenseMat pd = p.to_dense();
    DenseMat mb(12, 162);
    for (Index t = 0; t < 12; ++t)
        mb.row(t) = m.row(s.indices[static_cast<std::size_t>(t)]);
    // M_bb + M_bu P_u = M_b. P because P is the identity on landmark rows.
    DenseMat small = oracle::product(mb, pd);
    small.diagonal().array() += 50.0;
    const DenseMat ref = oracle::product(pd, oracle::inverse(small)) * 50.0;
    CHECK((h - ref).cwiseAbs().maxCoeff() <= 1e-8 * ref.cwiseAbs().maxCoeff());
}

TEST_CASE("FMDS transform tends to P for large mu") {
    const Fixture f(make_sphere_mesh(2));
    const LandmarkSet s = select_landmarks(f.oracle, 12);
    const InterpOperator p = interpolation_operator(f.m, s.indices);
    const DenseMat pd = p.to_dense();
    CHECK(oracle::rel_diff(fmds_operator(p, f.m, FmdsConfig{1e12}), pd) < 1e-4);
}

TEST_CASE("FMDS transform with every vertex as a landmark") {
    const Fixture f(make_sphere_mesh(0));
    const LandmarkSet s = select_landmarks(f.oracle, 12);
    const InterpOperator p = interpolation_operator(f.m, s.indices);
    const DenseMat h = fmds_operator(p, f.m, FmdsConfig{50.0});
    DenseMat mp = f.m.matrix().to_dense();
    DenseMat mperm(12, 12);
    for (Index a = 0; a < 12; ++a)
        for (Index b = 0; b < 12; ++b)
            mperm(a, b) = mp(s.indices[static_cast<std::size_t>(a)], s.indices[static_cast<std::size_t>(b)]);
    mperm.diagonal().array() += 50.0;
    const DenseMat ref = oracle::product(p.to_dense(), oracle::inverse(mperm)) * 50.0;
    CHECK((h - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("FMDS needs a positive mu") {
    const Fixture f(make_sphere_mesh(0));
    const LandmarkSet s = select_landmarks(f.oracle, 4);
    const InterpOperator p = interpolation_operator(f.m, s.indices);
    CHECK_THROWS(fmds_operator(p, f.m, FmdsConfig{0.0}));
}

}
