// bha: biharmonic geodesic distance approximation and canonical forms.
//
//   bha approx  --sphere 3 -l 64 --p-row 50 --artifact a.bha --report a.json
//   bha mds     --sphere 3 --artifact a.bha --csv z.csv --ply z.ply
//   bha compare --mesh bunny.off -l 200 --p-rows 10,50 --compare-csv cmp.csv
//   bha stats   --n 1804693 -l 50000 --p-row 50

#include "bha/pipeline/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace bha;
using namespace bha::pipeline;

/// Flags that mirror manifest fields; unset flags leave the manifest alone.
struct Overrides {
    std::string manifest_path;
    std::string dump_manifest;
    std::optional<std::string> mesh, format;
    std::optional<int> sphere;
    bool reject_degenerate = false;
    std::optional<Index> landmarks;
    std::optional<double> p_row;
    std::optional<Index> first;
    std::optional<std::uint64_t> first_random;
    std::optional<std::string> solver;
    std::optional<double> tol, regularization;
    std::optional<Index> max_iters;
    std::optional<Index> dim;
    std::optional<std::string> method;
    std::optional<double> lanczos_tol;
    std::optional<std::uint64_t> mds_seed;
    std::optional<Index> error_rows;
    std::optional<std::uint64_t> error_seed;
    std::optional<std::vector<double>> p_rows;
    std::optional<double> rcond;
    std::optional<unsigned> threads;
    std::optional<int> index_width;
    std::optional<std::string> artifact, report, csv, ply, compare_csv;

    RunManifest apply() const {
        RunManifest m = manifest_path.empty() ? RunManifest{} : load_manifest(manifest_path);
        if (mesh) {
            m.input.path = *mesh;
            m.input.sphere_subdivisions = -1;
        }
        if (format)
            m.input.format = *format;
        if (sphere)
            m.input.sphere_subdivisions = *sphere;
        if (reject_degenerate)
            m.input.drop_degenerate = false;
        if (landmarks)
            m.landmarks = *landmarks;
        if (p_row)
            m.p_row = *p_row;
        if (first) {
            m.first_landmark.policy = "index";
            m.first_landmark.index = *first;
        }
        if (first_random) {
            m.first_landmark.policy = "random";
            m.first_landmark.seed = *first_random;
        }
        if (solver) {
            if (*solver == "cholesky")
                m.solver.method = SolveMethod::cholesky;
            else if (*solver == "cg")
                m.solver.method = SolveMethod::conjugate_gradient;
            else
                throw ValidationError("--solver must be cholesky or cg");
        }
        if (tol)
            m.solver.rel_residual_tol = *tol;
        if (max_iters)
            m.solver.max_iters = *max_iters;
        if (regularization)
            m.solver.regularization = *regularization;
        if (dim)
            m.mds.dim = *dim;
        if (method)
            m.mds.method = *method;
        if (lanczos_tol)
            m.mds.lanczos_tol = *lanczos_tol;
        if (mds_seed)
            m.mds.seed = *mds_seed;
        if (error_rows)
            m.error_sample.rows = *error_rows;
        if (error_seed)
            m.error_sample.seed = *error_seed;
        if (p_rows)
            m.compare.p_rows = *p_rows;
        if (rcond)
            m.compare.nystrom_rcond = *rcond;
        if (threads)
            m.threads = *threads;
        if (index_width)
            m.index_width = *index_width;
        if (artifact)
            m.outputs.artifact = *artifact;
        if (report)
            m.outputs.report = *report;
        if (csv)
            m.outputs.embedding_csv = *csv;
        if (ply)
            m.outputs.ply = *ply;
        if (compare_csv)
            m.outputs.compare_csv = *compare_csv;
        return m;
    }
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--manifest", o.manifest_path, "JSON manifest; flags override its fields")->check(CLI::ExistingFile);
    app->add_option("--dump-manifest", o.dump_manifest, "Write the effective manifest here");
    app->add_option("--mesh", o.mesh, "Input mesh (.off or ascii .ply)");
    app->add_option("--format", o.format, "auto | off | ply");
    app->add_option("--sphere", o.sphere, "Use an icosphere with this many subdivisions");
    app->add_flag("--reject-degenerate", o.reject_degenerate, "Reject degenerate faces instead of dropping them");
    app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

void add_approx_flags(CLI::App* app, Overrides& o) {
    app->add_option("-l,--landmarks", o.landmarks, "Number of landmarks");
    app->add_option("--p-row", o.p_row, "Average non-zeros per row of P (0 = dense)");
    app->add_option("--first", o.first, "First landmark vertex");
    app->add_option("--first-random", o.first_random, "Pick the first landmark at random with this seed");
    app->add_option("--solver", o.solver, "cholesky | cg");
    app->add_option("--tol", o.tol, "Relative residual tolerance of the sparse solves");
    app->add_option("--max-iters", o.max_iters, "CG iteration cap");
    app->add_option("--regularization", o.regularization, "Diagonal shift on factorization failure");
    app->add_option("--index-width", o.index_width, "Bytes per stored index (4 or 8)");
}

void add_sample_flags(CLI::App* app, Overrides& o) {
    app->add_option("--error-rows", o.error_rows, "Reference rows for the error / stress estimate (0 = all)");
    app->add_option("--error-seed", o.error_seed, "Seed of the reference row sample");
    app->add_option("--report", o.report, "JSON report path");
}

void finish_manifest(const Overrides& o, const RunManifest& m) {
    if (!o.dump_manifest.empty())
        write_text(o.dump_manifest, to_json(m).dump(2) + "\n");
}

void print_timings(const StageTimes& t) {
    for (const auto& [stage, s] : t.entries())
        std::printf("  %-10s %.3f s\n", stage.c_str(), s);
}

int run_approx(const Overrides& o) {
    const RunManifest m = o.apply();
    finish_manifest(o, m);
    const ApproxResult r = cmd_approx(m);
    std::printf("n=%lld l=%lld storage=%s nnz=%lld\n", static_cast<long long>(r.approx.size()),
                static_cast<long long>(r.memory.l), r.memory.sparse ? "sparse" : "dense",
                static_cast<long long>(r.memory.nnz));
    std::printf("epsilon=%.6e over %lld rows%s\n", r.error.epsilon, static_cast<long long>(r.error.sample_size),
                r.error.full ? " (all)" : "");
    std::printf("memory: P %s, W %s, total %s\n", human_bytes(r.memory.bytes_p).c_str(),
                human_bytes(r.memory.bytes_w).c_str(), human_bytes(r.memory.bytes_total).c_str());
    print_timings(r.times);
    return 0;
}

int run_mds(const Overrides& o) {
    RunManifest m = o.apply();
    if (m.outputs.artifact.empty())
        throw StageError("manifest", "mds needs --artifact");
    const Artifact a = [&] {
        try {
            return load_artifact(m.outputs.artifact);
        } catch (const std::exception& e) {
            throw StageError("artifact", e.what());
        }
    }();
    if (m.input.path.empty() && m.input.sphere_subdivisions < 0 && a.manifest.contains("input")) {
        const RunManifest from = manifest_from_json(a.manifest);
        m.input = from.input;
    }
    finish_manifest(o, m);
    const MdsResult r = cmd_mds(m, a);
    std::printf("method=%s m=%lld\n", m.mds.method.c_str(), static_cast<long long>(r.embedding.z.cols()));
    for (Index k = 0; k < r.embedding.eigenvalues.size(); ++k)
        std::printf("  lambda_%lld = %.10e\n", static_cast<long long>(k), r.embedding.eigenvalues[k]);
    for (const auto& w : r.embedding.warnings)
        std::fprintf(stderr, "warning [eig]: %s\n", w.c_str());
    std::printf("stress: model %.6e, oracle %.6e over %lld rows\n", r.model_stress, r.oracle_stress.value,
                static_cast<long long>(r.oracle_stress.sample_size));
    print_timings(r.times);
    return 0;
}

int run_compare(const Overrides& o) {
    const RunManifest m = o.apply();
    finish_manifest(o, m);
    const CompareResult r = cmd_compare(m);
    std::fputs(compare_csv(r.rows).c_str(), stdout);
    return 0;
}

int run_stats(const Overrides& o, std::optional<Index> n) {
    RunManifest m = o.apply();
    if (!o.landmarks && !n)
        m.landmarks = 0;
    finish_manifest(o, m);
    std::cout << cmd_stats(m, n).dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biharmonic geodesic distance approximation"};
    app.require_subcommand(1);
    Overrides o;
    std::optional<Index> stats_n;

    auto* approx = app.add_subcommand("approx", "Build the factored approximation P W P^T");
    add_common(approx, o);
    add_approx_flags(approx, o);
    add_sample_flags(approx, o);
    approx->add_option("--artifact", o.artifact, "Output artifact path");

    auto* mds = app.add_subcommand("mds", "Canonical coordinates from an artifact");
    add_common(mds, o);
    add_sample_flags(mds, o);
    mds->add_option("--artifact", o.artifact, "Input artifact")->required();
    mds->add_option("-m,--dim", o.dim, "Embedding dimension");
    mds->add_option("--method", o.method, "sbmds | bmds");
    mds->add_option("--lanczos-tol", o.lanczos_tol, "Lanczos residual tolerance");
    mds->add_option("--seed", o.mds_seed, "Lanczos start vector seed");
    mds->add_option("--csv", o.csv, "Embedding CSV path");
    mds->add_option("--ply", o.ply, "Colored PLY path");

    auto* compare = app.add_subcommand("compare", "Error and size of BHA, sBHA and Nystrom");
    add_common(compare, o);
    add_approx_flags(compare, o);
    add_sample_flags(compare, o);
    compare->add_option("--p-rows", o.p_rows, "p_row values for sBHA")->delimiter(',');
    compare->add_option("--rcond", o.rcond, "Nystrom pseudoinverse cutoff");
    compare->add_option("--compare-csv", o.compare_csv, "Table output path");

    auto* stats = app.add_subcommand("stats", "Mesh statistics and memory accounting");
    add_common(stats, o);
    stats->add_option("-l,--landmarks", o.landmarks, "Landmarks for the memory accounting");
    stats->add_option("--p-row", o.p_row, "p_row for the memory accounting");
    stats->add_option("--index-width", o.index_width, "Bytes per stored index (4 or 8)");
    stats->add_option("--n", stats_n, "Vertex count; skips loading a mesh");

    CLI11_PARSE(app, argc, argv);

    try {
        if (approx->parsed())
            return run_approx(o);
        if (mds->parsed())
            return run_mds(o);
        if (compare->parsed())
            return run_compare(o);
        return run_stats(o, stats_n);
    } catch (const StageError& e) {
        std::fprintf(stderr, "error [%s]: %s\n", e.stage().c_str(), e.what() + e.stage().size() + 2);
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [manifest]: %s\n", e.what());
        return 2;
    }
}
