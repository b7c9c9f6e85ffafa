#pragma once

#include "bha/approx.hpp"
#include "bha/mds.hpp"
#include "bha/numerics/solve.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bha::pipeline {

/// Every parameter of a run. Two runs with equal manifests produce identical
/// numeric outputs.
struct RunManifest {
    struct Input {
        std::string path;          ///< mesh file; ignored when sphere_subdivisions >= 0
        std::string format = "auto"; ///< auto | off | ply
        int sphere_subdivisions = -1;
        bool drop_degenerate = true;
    } input;

    Index landmarks = 100;
    /// Average non-zeros per row of P; 0 keeps P dense.
    double p_row = 0.0;

    struct First {
        std::string policy = "index"; ///< index | random
        Index index = 0;
        std::uint64_t seed = 0;
    } first_landmark;

    SolveConfig solver;

    struct Mds {
        Index dim = 3;
        std::string method = "sbmds"; ///< sbmds | bmds
        double lanczos_tol = 1e-10;
        std::uint64_t seed = 0;
    } mds;

    struct ErrorSample {
        Index rows = 0; ///< 0 = every row
        std::uint64_t seed = 0;
    } error_sample;

    struct Compare {
        std::vector<double> p_rows{10.0, 50.0};
        double nystrom_rcond = 1e-12;
    } compare;

    /// Worker threads for distance rows and column solves; 0 = all cores.
    unsigned threads = 0;
    /// 4 or 8; 0 picks 4 when n < 2^31.
    int index_width = 0;

    struct Outputs {
        std::string artifact;
        std::string report;
        std::string embedding_csv;
        std::string ply;
        std::string compare_csv;
    } outputs;

    FirstLandmark first() const;
    void validate() const;
};

nlohmann::json to_json(const RunManifest& m);
/// Missing keys take their defaults; unknown keys are rejected.
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest load_manifest(const std::filesystem::path& path);

} // namespace bha::pipeline
