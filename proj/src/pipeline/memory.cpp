#include "bha/pipeline/memory.hpp"

#include "bha/errors.hpp"

#include <array>
#include <cstdio>
#include <limits>

namespace bha::pipeline {

int default_index_width(Index n) {
    return n <= static_cast<Index>(std::numeric_limits<std::int32_t>::max()) ? 4 : 8;
}

MemoryReport memory_report(Index n, Index l, bool sparse, Index nnz, int index_width) {
    if (l < 1 || l > n)
        throw ValidationError("memory report: need 1 <= l <= n");
    if (index_width == 0)
        index_width = default_index_width(n);
    if (index_width != 4 && index_width != 8)
        throw ValidationError("memory report: index width must be 4 or 8");
    if (index_width == 4 && n > static_cast<Index>(std::numeric_limits<std::int32_t>::max()))
        throw ValidationError("memory report: n does not fit 4-byte indices");
    MemoryReport r;
    r.n = n;
    r.l = l;
    r.sparse = sparse;
    r.index_width = index_width;
    const auto un = static_cast<std::uint64_t>(n);
    const auto ul = static_cast<std::uint64_t>(l);
    if (sparse) {
        r.nnz = nnz;
        r.bytes_p = static_cast<std::uint64_t>(nnz) * (8u + static_cast<std::uint64_t>(index_width)) + 8u * (ul + 1u);
    } else {
        r.nnz = (n - l) * l;
        r.bytes_p = 8u * (un - ul) * ul;
    }
    r.bytes_w = 8u * ul * ul;
    r.bytes_total = r.bytes_p + r.bytes_w;
    return r;
}

MemoryReport memory_report(const BhaApprox& approx, int index_width) {
    const InterpOperator& p = approx.p;
    return memory_report(p.rows(), p.cols(), p.is_sparse(), p.stored_entries(), index_width);
}

MemoryReport memory_accounting(Index n, Index l, double p_row, int index_width) {
    if (p_row == 0.0)
        return memory_report(n, l, false, 0, index_width);
    return memory_report(n, l, true, l * column_budget(n, l, p_row), index_width);
}

nlohmann::json to_json(const MemoryReport& r) {
    return {{"n", r.n},
            {"l", r.l},
            {"storage", r.sparse ? "sparse" : "dense"},
            {"nnz", r.nnz},
            {"index_width", r.index_width},
            {"bytes_P", r.bytes_p},
            {"bytes_W", r.bytes_w},
            {"bytes_total", r.bytes_total}};
}

MemoryReport memory_from_json(const nlohmann::json& j) {
    try {
        MemoryReport r;
        r.n = j.at("n").get<Index>();
        r.l = j.at("l").get<Index>();
        r.sparse = j.at("storage").get<std::string>() == "sparse";
        r.nnz = j.at("nnz").get<Index>();
        r.index_width = j.at("index_width").get<int>();
        r.bytes_p = j.at("bytes_P").get<std::uint64_t>();
        r.bytes_w = j.at("bytes_W").get<std::uint64_t>();
        r.bytes_total = j.at("bytes_total").get<std::uint64_t>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("memory report: ") + e.what());
    }
}

std::string human_bytes(std::uint64_t bytes) {
    static constexpr std::array<const char*, 5> units{"B", "kB", "MB", "GB", "TB"};
    double v = static_cast<double>(bytes);
    std::size_t u = 0;
    while (v >= 1000.0 && u + 1 < units.size()) {
        v /= 1000.0;
        ++u;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, u == 0 ? "%.0f %s" : "%.1f %s", v, units[u]);
    return buf;
}

} // namespace bha::pipeline
