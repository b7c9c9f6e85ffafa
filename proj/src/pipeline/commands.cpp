#include "bha/pipeline/commands.hpp"

#include "bha/geodesic.hpp"
#include "bha/laplacian.hpp"
#include "bha/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace bha::pipeline {

using nlohmann::json;

void StageTimes::add(const std::string& stage, double seconds) {
    for (auto& [name, t] : entries_)
        if (name == stage) {
            t += seconds;
            return;
        }
    entries_.emplace_back(stage, seconds);
}

double StageTimes::get(const std::string& stage) const {
    for (const auto& [name, t] : entries_)
        if (name == stage)
            return t;
    return 0.0;
}

double StageTimes::total() const {
    double s = 0.0;
    for (const auto& e : entries_)
        s += e.second;
    return s;
}

json StageTimes::to_json() const {
    json j = json::object();
    for (const auto& [name, t] : entries_)
        j[name] = t;
    return j;
}

unsigned resolve_threads(const RunManifest& manifest) {
    return manifest.threads == 0 ? default_threads() : manifest.threads;
}

TriMesh load_input(const RunManifest& manifest, MeshReport* report) {
    if (manifest.input.sphere_subdivisions >= 0)
        return make_sphere_mesh(manifest.input.sphere_subdivisions);
    MeshOptions opts;
    opts.drop_degenerate = manifest.input.drop_degenerate;
    const std::filesystem::path path = manifest.input.path;
    if (manifest.input.format == "auto")
        return load_mesh(path, opts, report);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open mesh " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_mesh(text, manifest.input.format == "off" ? MeshFormat::off : MeshFormat::ply_ascii, opts, report);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ValidationError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out)
        throw ValidationError("short write to " + path.string());
}

namespace {

json to_json(const MeshStats& s) {
    return {{"n_vertices", s.n_vertices},
            {"n_faces", s.n_faces},
            {"n_edges", s.n_edges},
            {"max_vertex_degree", s.max_vertex_degree},
            {"boundary_edge_count", s.boundary_edge_count},
            {"min_triangle_area", s.min_triangle_area}};
}

json to_json(const ErrorEstimate& e) {
    return {{"epsilon", e.epsilon}, {"sample_size", e.sample_size}, {"seed", e.seed}, {"full", e.full}};
}

json to_json(const SolveReport& s) {
    return {{"regularized", s.regularized},
            {"shift", s.shift},
            {"max_rel_residual", s.max_rel_residual},
            {"max_iterations", s.max_iterations}};
}

std::vector<std::string> mesh_warnings(const MeshReport& r) {
    std::vector<std::string> w;
    if (!r.dropped_faces.empty())
        w.push_back("dropped " + std::to_string(r.dropped_faces.size()) + " degenerate faces");
    if (!r.removed_vertices.empty())
        w.push_back("removed " + std::to_string(r.removed_vertices.size()) + " isolated vertices");
    return w;
}

SolveConfig solver_config(const RunManifest& m) {
    SolveConfig cfg = m.solver;
    cfg.threads = resolve_threads(m);
    return cfg;
}

void check_landmark_count(const RunManifest& m, Index n) {
    if (m.landmarks >= n)
        throw ValidationError("need l < n (l = " + std::to_string(m.landmarks) + ", n = " + std::to_string(n) + ")");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ApproxResult cmd_approx(const RunManifest& manifest) {
    StageTimes times;
    times.run("manifest", [&] { manifest.validate(); });
    const unsigned threads = resolve_threads(manifest);

    MeshReport mesh_report;
    const TriMesh mesh = times.run("mesh", [&] { return load_input(manifest, &mesh_report); });
    const Index n = mesh.num_vertices();
    times.run("manifest", [&] { check_landmark_count(manifest, n); });

    const EdgeDijkstraOracle oracle = times.run("oracle", [&] { return EdgeDijkstraOracle(mesh); });
    const LandmarkSet landmarks =
        times.run("landmarks", [&] { return select_landmarks(oracle, manifest.landmarks, manifest.first()); });
    const BiharmonicOp m = times.run("operator", [&] { return biharmonic_operator(laplacian_parts(mesh)); });

    SolveReport solve;
    InterpOperator p = times.run("solve", [&] {
        if (manifest.p_row > 0.0)
            return sparse_interpolation_operator(m, landmarks.indices, manifest.p_row, solver_config(manifest), &solve);
        return interpolation_operator(m, landmarks.indices, solver_config(manifest), &solve);
    });
    if (manifest.p_row > 0.0)
        times.add("threshold", solve.threshold_seconds);

    ApproxResult out{bha(std::move(p), landmarks, false), landmarks.indices, {}, {}, solve, {}, {}};
    const RowSample sample = times.run("reference", [&] {
        return sample_rows(oracle, manifest.error_sample.rows, manifest.error_sample.seed, threads);
    });
    out.error = times.run("error", [&] { return relative_error(out.approx, sample); });
    out.memory = memory_report(out.approx, manifest.index_width);

    const json manifest_json = to_json(manifest);
    if (!manifest.outputs.artifact.empty())
        times.run("write", [&] { save_artifact(manifest.outputs.artifact, out.approx, manifest_json, manifest.index_width); });

    out.times = times;
    out.report = {{"command", "approx"},
                  {"manifest", manifest_json},
                  {"mesh", to_json(mesh_stats(mesh))},
                  {"warnings", mesh_warnings(mesh_report)},
                  {"landmarks", landmarks.indices},
                  {"memory", to_json(out.memory)},
                  {"error", to_json(out.error)},
                  {"solver", to_json(solve)},
                  {"timings", times.to_json()}};
    if (!manifest.outputs.report.empty())
        times.run("write", [&] { write_text(manifest.outputs.report, out.report.dump(2) + "\n"); });
    return out;
}

MdsResult cmd_mds(const RunManifest& manifest, const Artifact& artifact) {
    StageTimes times;
    times.run("manifest", [&] { manifest.validate(); });
    const unsigned threads = resolve_threads(manifest);

    BhaApprox approx = artifact.approx;
    if (!approx.squared) {
        approx.w = approx.w.cwiseProduct(approx.w);
        approx.squared = true;
    }
    const Index n = approx.size();
    const Index dim = manifest.mds.dim;
    if (dim > approx.p.cols() || dim >= n)
        throw StageError("manifest", "mds.dim must be below n and at most l");

    MdsResult out;
    out.embedding = times.run("eig", [&] {
        if (manifest.mds.method == "bmds")
            return bmds(approx, dim);
        LanczosConfig cfg;
        cfg.tol = manifest.mds.lanczos_tol;
        cfg.seed = manifest.mds.seed;
        return sbmds(approx, dim, cfg);
    });
    out.model_stress = times.run("stress", [&] { return stress(out.embedding.z, approx); });

    const TriMesh mesh = times.run("mesh", [&] {
        TriMesh mesh = load_input(manifest);
        if (mesh.num_vertices() != n)
            throw DimensionMismatch("mesh has " + std::to_string(mesh.num_vertices()) +
                                    " vertices but the artifact has " + std::to_string(n));
        return mesh;
    });
    out.oracle_stress = times.run("stress", [&] {
        const EdgeDijkstraOracle oracle(mesh);
        const RowSample sample = sample_rows(oracle, manifest.error_sample.rows, manifest.error_sample.seed, threads);
        return stress(out.embedding.z, sample);
    });

    if (!manifest.outputs.embedding_csv.empty())
        times.run("write", [&] { write_text(manifest.outputs.embedding_csv, embedding_csv(out.embedding.z)); });
    if (!manifest.outputs.ply.empty())
        times.run("write", [&] { write_text(manifest.outputs.ply, write_ply(mesh, embedding_colors(out.embedding.z))); });

    out.times = times;
    out.report = {{"command", "mds"},
                  {"manifest", to_json(manifest)},
                  {"artifact_manifest", artifact.manifest},
                  {"method", manifest.mds.method},
                  {"eigenvalues", std::vector<double>(out.embedding.eigenvalues.data(),
                                                      out.embedding.eigenvalues.data() + out.embedding.eigenvalues.size())},
                  {"warnings", out.embedding.warnings},
                  {"stress", {{"model", out.model_stress},
                              {"oracle", out.oracle_stress.value},
                              {"oracle_sample_size", out.oracle_stress.sample_size},
                              {"oracle_seed", out.oracle_stress.seed}}},
                  {"timings", times.to_json()}};
    if (!manifest.outputs.report.empty())
        times.run("write", [&] { write_text(manifest.outputs.report, out.report.dump(2) + "\n"); });
    return out;
}

CompareResult cmd_compare(const RunManifest& manifest) {
    StageTimes times;
    times.run("manifest", [&] { manifest.validate(); });
    const unsigned threads = resolve_threads(manifest);

    MeshReport mesh_report;
    const TriMesh mesh = times.run("mesh", [&] { return load_input(manifest, &mesh_report); });
    const Index n = mesh.num_vertices();
    const Index l = manifest.landmarks;
    times.run("manifest", [&] { check_landmark_count(manifest, n); });

    const EdgeDijkstraOracle oracle = times.run("oracle", [&] { return EdgeDijkstraOracle(mesh); });
    const RowSample sample = times.run("reference", [&] {
        return sample_rows(oracle, manifest.error_sample.rows, manifest.error_sample.seed, threads);
    });
    const LandmarkSet landmarks =
        times.run("landmarks", [&] { return select_landmarks(oracle, l, manifest.first()); });
    const BiharmonicOp m = times.run("operator", [&] { return biharmonic_operator(laplacian_parts(mesh)); });

    CompareResult out;
    const auto t_solve = std::chrono::steady_clock::now();
    InterpOperator dense = times.run("solve", [&] {
        return interpolation_operator(m, landmarks.indices, solver_config(manifest));
    });
    const double solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_solve).count();

    const BhaApprox full = bha(dense, landmarks, false);
    const ErrorEstimate e_full = times.run("error", [&] { return relative_error(full, sample); });
    const MemoryReport mem_full = memory_report(full, manifest.index_width);
    out.rows.push_back({"bha", l, 0.0, mem_full.nnz, e_full.epsilon, mem_full.bytes_total, solve_seconds});
    out.reference = e_full;

    std::vector<double> p_rows = manifest.compare.p_rows;
    std::sort(p_rows.begin(), p_rows.end());
    p_rows.erase(std::unique(p_rows.begin(), p_rows.end()), p_rows.end());
    for (double p_row : p_rows) {
        const auto t0 = std::chrono::steady_clock::now();
        InterpOperator sparse = times.run("threshold", [&] { return sparsify_operator(dense, p_row); });
        const double seconds =
            solve_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const BhaApprox approx = bha(std::move(sparse), landmarks, false);
        const ErrorEstimate e = times.run("error", [&] { return relative_error(approx, sample); });
        const MemoryReport mem = memory_report(approx, manifest.index_width);
        out.rows.push_back({"sbha", l, p_row, mem.nnz, e.epsilon, mem.bytes_total, seconds});
    }

    const auto t_ny = std::chrono::steady_clock::now();
    const NystromApprox ny = times.run("nystrom", [&] { return nystrom(landmarks, manifest.compare.nystrom_rcond); });
    const double ny_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_ny).count();
    const ErrorEstimate e_ny = times.run("error", [&] { return relative_error(ny, sample); });
    const auto un = static_cast<std::uint64_t>(n);
    const auto ul = static_cast<std::uint64_t>(l);
    out.rows.push_back({"nystrom", l, 0.0, n * l, e_ny.epsilon, 8u * un * ul + 8u * ul * ul, ny_seconds});

    if (!manifest.outputs.compare_csv.empty())
        times.run("write", [&] { write_text(manifest.outputs.compare_csv, compare_csv(out.rows)); });

    json rows = json::array();
    for (const auto& r : out.rows)
        rows.push_back({{"method", r.method},
                        {"l", r.l},
                        {"p_row", r.p_row},
                        {"nnz", r.nnz},
                        {"epsilon", r.epsilon},
                        {"bytes", r.bytes},
                        {"seconds", r.seconds}});
    out.times = times;
    out.report = {{"command", "compare"},
                  {"manifest", to_json(manifest)},
                  {"mesh", to_json(mesh_stats(mesh))},
                  {"warnings", mesh_warnings(mesh_report)},
                  {"landmarks", landmarks.indices},
                  {"reference", {{"sample_size", sample.rows.size()}, {"seed", sample.seed}, {"full", sample.full}}},
                  {"nystrom", {{"rcond", ny.rcond}, {"conditioning", ny.conditioning}, {"rank", ny.rank}}},
                  {"rows", rows},
                  {"timings", times.to_json()}};
    if (!manifest.outputs.report.empty())
        times.run("write", [&] { write_text(manifest.outputs.report, out.report.dump(2) + "\n"); });
    return out;
}

json cmd_stats(const RunManifest& manifest, std::optional<Index> n) {
    json out = {{"command", "stats"}};
    if (!n) {
        StageTimes times;
        MeshReport mesh_report;
        const TriMesh mesh = times.run("mesh", [&] { return load_input(manifest, &mesh_report); });
        out["mesh"] = to_json(mesh_stats(mesh));
        out["warnings"] = mesh_warnings(mesh_report);
        n = mesh.num_vertices();
    }
    if (manifest.landmarks > 0 && manifest.landmarks <= *n) {
        StageTimes times;
        const MemoryReport r = times.run("memory", [&] {
            return memory_accounting(*n, manifest.landmarks, manifest.p_row, manifest.index_width);
        });
        out["memory"] = to_json(r);
        out["memory_human"] = human_bytes(r.bytes_total);
    }
    return out;
}

std::vector<Rgb> embedding_colors(const DenseMat& z) {
    const Index n = z.rows();
    std::vector<Rgb> colors(static_cast<std::size_t>(n), Rgb{0, 0, 0});
    for (Index c = 0; c < std::min<Index>(3, z.cols()); ++c) {
        const double lo = z.col(c).minCoeff();
        const double hi = z.col(c).maxCoeff();
        const double range = hi - lo;
        if (!(range > 0.0))
            continue;
        for (Index i = 0; i < n; ++i) {
            const double t = std::clamp((z(i, c) - lo) / range, 0.0, 1.0);
            colors[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
                static_cast<std::uint8_t>(std::lround(255.0 * t));
        }
    }
    return colors;
}

std::string embedding_csv(const DenseMat& z) {
    std::string s;
    for (Index c = 0; c < z.cols(); ++c)
        s += (c ? ",z" : "z") + std::to_string(c);
    s += '\n';
    for (Index i = 0; i < z.rows(); ++i) {
        for (Index c = 0; c < z.cols(); ++c) {
            if (c)
                s += ',';
            s += fmt17(z(i, c));
        }
        s += '\n';
    }
    return s;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
    std::string s = "method,l,p_row,nnz,epsilon,bytes\n";
    for (const auto& r : rows)
        s += r.method + ',' + std::to_string(r.l) + ',' + fmt17(r.p_row) + ',' + std::to_string(r.nnz) + ',' +
             fmt17(r.epsilon) + ',' + std::to_string(r.bytes) + '\n';
    return s;
}

} // namespace bha::pipeline
