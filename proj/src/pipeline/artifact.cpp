#include "bha/pipeline/artifact.hpp"

#include "bha/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <string_view>
#include <vector>

namespace bha::pipeline {

namespace {

constexpr std::string_view kMagic = "BHAAPPRX";

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_)
            throw ValidationError("cannot write artifact " + path.string());
    }

    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

    template <typename T>
    void scalar(T v) {
        v = to_little(v);
        bytes(&v, sizeof v);
    }

    void index(Index v, int width) {
        if (width == 4)
            scalar(static_cast<std::uint32_t>(v));
        else
            scalar(static_cast<std::uint64_t>(v));
    }

    void doubles(const double* p, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(p, n * sizeof(double));
        } else {
            for (std::size_t k = 0; k < n; ++k)
                scalar(p[k]);
        }
    }

    void finish(const std::filesystem::path& path) {
        out_.flush();
        if (!out_)
            throw ValidationError("short write to artifact " + path.string());
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_)
            throw ValidationError("cannot open artifact " + path.string());
    }

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw ValidationError("artifact " + path_.string() + " is truncated");
    }

    template <typename T>
    T scalar() {
        T v;
        bytes(&v, sizeof v);
        return to_little(v);
    }

    Index index(int width) {
        if (width == 4)
            return static_cast<Index>(scalar<std::uint32_t>());
        return static_cast<Index>(scalar<std::uint64_t>());
    }

    void doubles(double* p, std::size_t n) {
        bytes(p, n * sizeof(double));
        if constexpr (std::endian::native == std::endian::big)
            for (std::size_t k = 0; k < n; ++k)
                p[k] = to_little(p[k]);
    }

    bool at_end() { return in_.peek() == std::ifstream::traits_type::eof(); }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

} // namespace

MemoryReport save_artifact(const std::filesystem::path& path, const BhaApprox& approx,
                           const nlohmann::json& manifest, int index_width) {
    const InterpOperator& p = approx.p;
    const Index n = p.rows();
    const Index l = p.cols();
    const MemoryReport memory = memory_report(approx, index_width);
    const int iw = memory.index_width;

    nlohmann::json header = {{"n", n},
                             {"l", l},
                             {"squared", approx.squared},
                             {"storage", p.is_sparse() ? "sparse" : "dense"},
                             {"index_width", iw},
                             {"nnz", memory.nnz},
                             {"manifest", manifest},
                             {"memory", to_json(memory)}};
    const std::string text = header.dump();

    Writer w(path);
    w.bytes(kMagic.data(), kMagic.size());
    w.scalar(kArtifactVersion);
    w.scalar(static_cast<std::uint64_t>(text.size()));
    w.bytes(text.data(), text.size());
    for (Index v : p.landmarks())
        w.index(v, iw);
    const DenseMat wr = approx.w.transpose();
    w.doubles(wr.data(), static_cast<std::size_t>(l * l));
    if (p.is_sparse()) {
        const SparseRect& s = p.sparse_block();
        for (Index c = 0; c <= l; ++c)
            w.scalar(static_cast<std::uint64_t>(s.col_ptr()[static_cast<std::size_t>(c)]));
        for (Index r : s.row_idx())
            w.index(r, iw);
        w.doubles(s.values().data(), s.values().size());
    } else {
        const DenseMat& d = p.dense_block();
        w.doubles(d.data(), static_cast<std::size_t>(d.size()));
    }
    w.finish(path);
    return memory;
}

Artifact load_artifact(const std::filesystem::path& path) {
    Reader r(path);
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::string_view(magic, sizeof magic) != kMagic)
        throw ValidationError(path.string() + " is not a BHA artifact");
    const auto version = r.scalar<std::uint32_t>();
    if (version != kArtifactVersion)
        throw ValidationError("unsupported artifact version " + std::to_string(version));
    const auto header_len = r.scalar<std::uint64_t>();
    if (header_len > (std::uint64_t{1} << 32))
        throw ValidationError("artifact header length is implausible");
    std::string text(static_cast<std::size_t>(header_len), '\0');
    r.bytes(text.data(), text.size());

    nlohmann::json header;
    Index n = 0, l = 0, nnz = 0;
    int iw = 4;
    bool squared = false, sparse = false;
    try {
        header = nlohmann::json::parse(text);
        n = header.at("n").get<Index>();
        l = header.at("l").get<Index>();
        nnz = header.at("nnz").get<Index>();
        iw = header.at("index_width").get<int>();
        squared = header.at("squared").get<bool>();
        sparse = header.at("storage").get<std::string>() == "sparse";
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("artifact header: " + std::string(e.what()));
    }
    if (l < 1 || l > n || (iw != 4 && iw != 8) || nnz < 0)
        throw ValidationError("artifact header is inconsistent");

    std::vector<Index> landmarks(static_cast<std::size_t>(l));
    for (auto& v : landmarks)
        v = r.index(iw);
    DenseMat wr(l, l);
    r.doubles(wr.data(), static_cast<std::size_t>(l * l));
    DenseMat w = wr.transpose();

    const Index nu = n - l;
    InterpOperator p = [&] {
        if (!sparse) {
            DenseMat d(nu, l);
            r.doubles(d.data(), static_cast<std::size_t>(nu * l));
            return InterpOperator::make_dense(n, landmarks, std::move(d));
        }
        std::vector<std::uint64_t> ptr(static_cast<std::size_t>(l + 1));
        for (auto& c : ptr)
            c = r.scalar<std::uint64_t>();
        if (ptr.front() != 0 || ptr.back() != static_cast<std::uint64_t>(nnz) ||
            !std::is_sorted(ptr.begin(), ptr.end()))
            throw ValidationError("artifact column pointers are inconsistent");
        std::vector<Index> rows(static_cast<std::size_t>(nnz));
        for (auto& v : rows)
            v = r.index(iw);
        std::vector<double> vals(static_cast<std::size_t>(nnz));
        r.doubles(vals.data(), vals.size());
        SparseRect s(nu, l, nnz);
        for (Index c = 0; c < l; ++c) {
            const auto b = static_cast<std::size_t>(ptr[static_cast<std::size_t>(c)]);
            const auto e = static_cast<std::size_t>(ptr[static_cast<std::size_t>(c) + 1]);
            s.append_column(std::span<const Index>(rows.data() + b, e - b),
                            std::span<const double>(vals.data() + b, e - b));
        }
        return InterpOperator::make_sparse(n, landmarks, std::move(s));
    }();
    if (!r.at_end())
        throw ValidationError("artifact has trailing bytes");

    Artifact a{BhaApprox{std::move(p), std::move(w), squared}, header.value("manifest", nlohmann::json::object()),
               MemoryReport{}};
    a.memory = header.contains("memory") ? memory_from_json(header["memory"]) : memory_report(a.approx, iw);
    return a;
}

} // namespace bha::pipeline
