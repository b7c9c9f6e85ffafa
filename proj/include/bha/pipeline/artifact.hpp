#pragma once

#include "bha/approx.hpp"
#include "bha/pipeline/memory.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>

namespace bha::pipeline {

/// Container layout, all integers and floats little-endian:
///
///   8 bytes   magic "BHAAPPRX"
///   u32       version (1)
///   u64       header length h
///   h bytes   UTF-8 JSON header: n, l, squared, storage, index_width, nnz,
///             manifest, memory
///   l ints    landmark vertex indices (index_width bytes each)
///   l*l f64   W, row-major
///   sparse:   (l+1) u64 column pointers, nnz ints of free-row indices,
///             nnz f64 values
///   dense:    (n-l)*l f64, P_u column-major
///
/// Free rows are numbered 0..n-l-1 in ascending vertex order.
inline constexpr std::uint32_t kArtifactVersion = 1;

struct Artifact {
    BhaApprox approx;
    nlohmann::json manifest;
    MemoryReport memory;
};

/// Returns the memory report written into the header.
MemoryReport save_artifact(const std::filesystem::path& path, const BhaApprox& approx,
                           const nlohmann::json& manifest, int index_width = 0);

Artifact load_artifact(const std::filesystem::path& path);

} // namespace bha::pipeline
