#pragma once

#include "bha/approx.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace bha::pipeline {

/// Bytes needed to store a factored approximation P W P^T.
///
/// Dense P_u: 8 (n - l) l. Sparse P_u: nnz (8 + index_width) + 8 (l + 1) for
/// the column pointers. W: 8 l^2. The identity rows of P are implicit.
struct MemoryReport {
    Index n = 0;
    Index l = 0;
    bool sparse = false;
    Index nnz = 0;
    int index_width = 4;
    std::uint64_t bytes_p = 0;
    std::uint64_t bytes_w = 0;
    std::uint64_t bytes_total = 0;

    bool operator==(const MemoryReport&) const = default;
};

/// 4 when every vertex index fits in a signed 32-bit integer, else 8.
int default_index_width(Index n);

MemoryReport memory_report(Index n, Index l, bool sparse, Index nnz, int index_width = 0);
MemoryReport memory_report(const BhaApprox& approx, int index_width = 0);

/// Accounting without building anything: nnz = l * column_budget(n, l, p_row),
/// or dense storage when p_row is 0.
MemoryReport memory_accounting(Index n, Index l, double p_row, int index_width = 0);

nlohmann::json to_json(const MemoryReport& r);
MemoryReport memory_from_json(const nlohmann::json& j);

/// "20.9 GB" style, decimal units.
std::string human_bytes(std::uint64_t bytes);

} // namespace bha::pipeline
