#include "bha/pipeline/manifest.hpp"

#include "bha/errors.hpp"

#include <fstream>
#include <set>

namespace bha::pipeline {

using nlohmann::json;

FirstLandmark RunManifest::first() const {
    if (first_landmark.policy == "random")
        return FirstLandmark::random(first_landmark.seed);
    return FirstLandmark::fixed(first_landmark.index);
}

void RunManifest::validate() const {
    if (input.sphere_subdivisions < 0 && input.path.empty())
        throw ValidationError("manifest: no input mesh");
    if (input.format != "auto" && input.format != "off" && input.format != "ply")
        throw ValidationError("manifest: unknown input format '" + input.format + "'");
    if (landmarks < 1)
        throw ValidationError("manifest: landmarks must be >= 1");
    if (p_row < 0.0)
        throw ValidationError("manifest: p_row must be >= 0");
    if (first_landmark.policy != "index" && first_landmark.policy != "random")
        throw ValidationError("manifest: first_landmark.policy must be index or random");
    if (mds.dim < 1)
        throw ValidationError("manifest: mds.dim must be >= 1");
    if (mds.method != "sbmds" && mds.method != "bmds")
        throw ValidationError("manifest: mds.method must be sbmds or bmds");
    if (index_width != 0 && index_width != 4 && index_width != 8)
        throw ValidationError("manifest: index_width must be 4 or 8");
    for (double p : compare.p_rows)
        if (!(p > 0.0))
            throw ValidationError("manifest: compare.p_rows entries must be > 0");
    solver.validate();
}

json to_json(const RunManifest& m) {
    json j;
    j["input"] = {{"path", m.input.path},
                  {"format", m.input.format},
                  {"sphere_subdivisions", m.input.sphere_subdivisions},
                  {"drop_degenerate", m.input.drop_degenerate}};
    j["landmarks"] = m.landmarks;
    j["p_row"] = m.p_row;
    j["first_landmark"] = {{"policy", m.first_landmark.policy},
                           {"index", m.first_landmark.index},
                           {"seed", m.first_landmark.seed}};
    j["solver"] = {{"method", m.solver.method == SolveMethod::cholesky ? "cholesky" : "cg"},
                   {"rel_residual_tol", m.solver.rel_residual_tol},
                   {"max_iters", m.solver.max_iters.value_or(0)},
                   {"regularization", m.solver.regularization}};
    j["mds"] = {{"dim", m.mds.dim},
                {"method", m.mds.method},
                {"lanczos_tol", m.mds.lanczos_tol},
                {"seed", m.mds.seed}};
    j["error_sample"] = {{"rows", m.error_sample.rows}, {"seed", m.error_sample.seed}};
    j["compare"] = {{"p_rows", m.compare.p_rows}, {"nystrom_rcond", m.compare.nystrom_rcond}};
    j["threads"] = m.threads;
    j["index_width"] = m.index_width;
    j["outputs"] = {{"artifact", m.outputs.artifact},
                    {"report", m.outputs.report},
                    {"embedding_csv", m.outputs.embedding_csv},
                    {"ply", m.outputs.ply},
                    {"compare_csv", m.outputs.compare_csv}};
    return j;
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object())
        throw ValidationError("manifest: '" + where + "' must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, _] : j.items())
        if (!allowed.count(k))
            throw ValidationError("manifest: unknown key '" + where + (where.empty() ? "" : ".") + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    try {
        reject_unknown(j, {"input", "landmarks", "p_row", "first_landmark", "solver", "mds", "error_sample",
                           "compare", "threads", "index_width", "outputs"},
                       "");
        if (j.contains("input")) {
            const json& in = j["input"];
            reject_unknown(in, {"path", "format", "sphere_subdivisions", "drop_degenerate"}, "input");
            read(in, "path", m.input.path);
            read(in, "format", m.input.format);
            read(in, "sphere_subdivisions", m.input.sphere_subdivisions);
            read(in, "drop_degenerate", m.input.drop_degenerate);
        }
        read(j, "landmarks", m.landmarks);
        read(j, "p_row", m.p_row);
        if (j.contains("first_landmark")) {
            const json& f = j["first_landmark"];
            reject_unknown(f, {"policy", "index", "seed"}, "first_landmark");
            read(f, "policy", m.first_landmark.policy);
            read(f, "index", m.first_landmark.index);
            read(f, "seed", m.first_landmark.seed);
        }
        if (j.contains("solver")) {
            const json& s = j["solver"];
            reject_unknown(s, {"method", "rel_residual_tol", "max_iters", "regularization"}, "solver");
            std::string method = "cholesky";
            read(s, "method", method);
            if (method == "cholesky")
                m.solver.method = SolveMethod::cholesky;
            else if (method == "cg")
                m.solver.method = SolveMethod::conjugate_gradient;
            else
                throw ValidationError("manifest: solver.method must be cholesky or cg");
            read(s, "rel_residual_tol", m.solver.rel_residual_tol);
            Index iters = 0;
            read(s, "max_iters", iters);
            if (iters > 0)
                m.solver.max_iters = iters;
            read(s, "regularization", m.solver.regularization);
        }
        if (j.contains("mds")) {
            const json& d = j["mds"];
            reject_unknown(d, {"dim", "method", "lanczos_tol", "seed"}, "mds");
            read(d, "dim", m.mds.dim);
            read(d, "method", m.mds.method);
            read(d, "lanczos_tol", m.mds.lanczos_tol);
            read(d, "seed", m.mds.seed);
        }
        if (j.contains("error_sample")) {
            const json& e = j["error_sample"];
            reject_unknown(e, {"rows", "seed"}, "error_sample");
            read(e, "rows", m.error_sample.rows);
            read(e, "seed", m.error_sample.seed);
        }
        if (j.contains("compare")) {
            const json& c = j["compare"];
            reject_unknown(c, {"p_rows", "nystrom_rcond"}, "compare");
            read(c, "p_rows", m.compare.p_rows);
            read(c, "nystrom_rcond", m.compare.nystrom_rcond);
        }
        read(j, "threads", m.threads);
        read(j, "index_width", m.index_width);
        if (j.contains("outputs")) {
            const json& o = j["outputs"];
            reject_unknown(o, {"artifact", "report", "embedding_csv", "ply", "compare_csv"}, "outputs");
            read(o, "artifact", m.outputs.artifact);
            read(o, "report", m.outputs.report);
            read(o, "embedding_csv", m.outputs.embedding_csv);
            read(o, "ply", m.outputs.ply);
            read(o, "compare_csv", m.outputs.compare_csv);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open manifest " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("manifest " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

} // namespace bha::pipeline
