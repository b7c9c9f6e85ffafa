#pragma once

#include "bha/approx.hpp"
#include "bha/errors.hpp"
#include "bha/mds.hpp"
#include "bha/mesh.hpp"
#include "bha/pipeline/artifact.hpp"
#include "bha/pipeline/manifest.hpp"
#include "bha/pipeline/memory.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bha::pipeline {

/// An error raised inside a named pipeline stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Wall time per stage, in the order the stages first ran.
class StageTimes {
public:
    /// Runs f, records its wall time and relabels any exception with the stage name.
    template <typename F>
    decltype(auto) run(const std::string& stage, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(f())>) {
                f();
                add(stage, seconds_since(t0));
            } else {
                decltype(auto) out = f();
                add(stage, seconds_since(t0));
                return out;
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(stage, e.what());
        }
    }

    /// Repeated stages accumulate into their first entry.
    void add(const std::string& stage, double seconds);
    double get(const std::string& stage) const;
    double total() const;
    const std::vector<std::pair<std::string, double>>& entries() const noexcept { return entries_; }
    nlohmann::json to_json() const;

private:
    static double seconds_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    std::vector<std::pair<std::string, double>> entries_;
};

TriMesh load_input(const RunManifest& manifest, MeshReport* report = nullptr);

unsigned resolve_threads(const RunManifest& manifest);

struct ApproxResult {
    BhaApprox approx;
    std::vector<Index> landmarks;
    MemoryReport memory;
    ErrorEstimate error;
    SolveReport solve;
    StageTimes times;
    nlohmann::json report;
};

/// Landmarks, biharmonic interpolation, relative error on a row sample.
/// Writes the artifact and the JSON report when their paths are set.
ApproxResult cmd_approx(const RunManifest& manifest);

struct MdsResult {
    Embedding embedding;
    /// ||Z Z^T - B_hat||_F^2 against the factored approximation.
    double model_stress = 0.0;
    /// Row-sampled stress against squared oracle distances.
    StressEstimate oracle_stress;
    StageTimes times;
    nlohmann::json report;
};

/// Embeds with bmds or sbmds. A raw artifact has W squared first. Writes the
/// CSV, the colored PLY and the JSON report when their paths are set.
MdsResult cmd_mds(const RunManifest& manifest, const Artifact& artifact);

struct CompareRow {
    std::string method; ///< bha | sbha | nystrom
    Index l = 0;
    double p_row = 0.0; ///< 0 for dense methods
    Index nnz = 0;
    double epsilon = 0.0;
    std::uint64_t bytes = 0;
    double seconds = 0.0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    ErrorEstimate reference; ///< sample size and seed of the error rows
    StageTimes times;
    nlohmann::json report;
};

/// BHA, sBHA at every compare.p_rows entry and Nyström, all on the same
/// landmarks and the same reference rows.
CompareResult cmd_compare(const RunManifest& manifest);

/// Mesh statistics and, when landmarks > 0, memory accounting for the
/// manifest's l and p_row. No mesh is needed when `n` is given.
nlohmann::json cmd_stats(const RunManifest& manifest, std::optional<Index> n = std::nullopt);

/// Per-column min-max normalization of the first three coordinates to 0..255;
/// a column with zero range maps to 0, missing columns are 0.
std::vector<Rgb> embedding_colors(const DenseMat& z);

/// Header row z0,z1,..., then one row per vertex, 17 significant digits.
std::string embedding_csv(const DenseMat& z);
/// Deterministic columns only; wall times stay in the JSON report.
std::string compare_csv(const std::vector<CompareRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace bha::pipeline
