#include "bha/mesh.hpp"

#include "bha/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace bha {

namespace {

double twice_area(const VertexMat& v, Index a, Index b, Index c) {
    const Eigen::Vector3d e1 = v.row(b) - v.row(a);
    const Eigen::Vector3d e2 = v.row(c) - v.row(a);
    return e1.cross(e2).norm();
}

double longest_edge_sq(const VertexMat& v, Index a, Index b, Index c) {
    return std::max({(v.row(a) - v.row(b)).squaredNorm(), (v.row(b) - v.row(c)).squaredNorm(),
                     (v.row(c) - v.row(a)).squaredNorm()});
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace

TriMesh TriMesh::build(VertexMat vertices, FaceMat faces, const MeshOptions& opts, MeshReport* report) {
    const Index n_in = vertices.rows();
    MeshReport local;
    MeshReport& rep = report ? *report : local;
    rep = MeshReport{};

    if (!vertices.allFinite())
        throw ValidationError("vertex coordinates must be finite");
    if (faces.rows() == 0)
        throw ValidationError("mesh has no faces");

    std::vector<Index> kept;
    kept.reserve(static_cast<std::size_t>(faces.rows()));
    for (Index f = 0; f < faces.rows(); ++f) {
        const Index a = faces(f, 0), b = faces(f, 1), c = faces(f, 2);
        for (Index idx : {a, b, c})
            if (idx < 0 || idx >= n_in)
                throw ValidationError("face " + std::to_string(f) + " references vertex " +
                                      std::to_string(idx) + " outside [0," + std::to_string(n_in) + ")");
        const bool repeats = a == b || b == c || a == c;
        const bool flat = repeats || twice_area(vertices, a, b, c) <=
                                         opts.degenerate_eps * longest_edge_sq(vertices, a, b, c);
        if (flat) {
            if (!opts.drop_degenerate)
                throw ValidationError("face " + std::to_string(f) + " is degenerate (zero area)");
            rep.dropped_faces.push_back(f);
            continue;
        }
        kept.push_back(f);
    }
    if (kept.empty())
        throw ValidationError("every face is degenerate");

    std::vector<char> used(static_cast<std::size_t>(n_in), 0);
    for (Index f : kept)
        for (int k = 0; k < 3; ++k)
            used[static_cast<std::size_t>(faces(f, k))] = 1;
    rep.vertex_remap.assign(static_cast<std::size_t>(n_in), -1);
    Index n = 0;
    for (Index v = 0; v < n_in; ++v) {
        if (used[static_cast<std::size_t>(v)])
            rep.vertex_remap[static_cast<std::size_t>(v)] = n++;
        else
            rep.removed_vertices.push_back(v);
    }

    TriMesh m;
    m.vertices_.resize(n, 3);
    for (Index v = 0; v < n_in; ++v)
        if (rep.vertex_remap[static_cast<std::size_t>(v)] >= 0)
            m.vertices_.row(rep.vertex_remap[static_cast<std::size_t>(v)]) = vertices.row(v);
    m.faces_.resize(static_cast<Index>(kept.size()), 3);
    for (std::size_t f = 0; f < kept.size(); ++f)
        for (int k = 0; k < 3; ++k)
            m.faces_(static_cast<Index>(f), k) =
                rep.vertex_remap[static_cast<std::size_t>(faces(kept[f], k))];

    // Edges: collect (min, max) pairs per face, sort, count multiplicity.
    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(kept.size() * 3);
    for (Index f = 0; f < m.num_faces(); ++f)
        for (int k = 0; k < 3; ++k) {
            const Index a = m.faces_(f, k), b = m.faces_(f, (k + 1) % 3);
            pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 0; i < pairs.size();) {
        std::size_t j = i;
        while (j < pairs.size() && pairs[j] == pairs[i])
            ++j;
        const int count = static_cast<int>(j - i);
        if (count > 2)
            throw ValidationError("non-manifold edge (" + std::to_string(pairs[i].first) + "," +
                                  std::to_string(pairs[i].second) + ") shared by " +
                                  std::to_string(count) + " faces");
        const auto [a, b] = pairs[i];
        const double len = (m.vertices_.row(a) - m.vertices_.row(b)).norm();
        if (!(len > 0.0))
            throw ValidationError("zero-length edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
        m.edges_.push_back({a, b, len});
        m.edge_faces_.push_back(count);
        i = j;
    }

    m.vf_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Index f = 0; f < m.num_faces(); ++f)
        for (int k = 0; k < 3; ++k)
            ++m.vf_ptr_[static_cast<std::size_t>(m.faces_(f, k)) + 1];
    for (std::size_t v = 0; v < static_cast<std::size_t>(n); ++v)
        m.vf_ptr_[v + 1] += m.vf_ptr_[v];
    m.vf_idx_.resize(static_cast<std::size_t>(m.vf_ptr_.back()));
    std::vector<Index> fill(m.vf_ptr_.begin(), m.vf_ptr_.end() - 1);
    for (Index f = 0; f < m.num_faces(); ++f)
        for (int k = 0; k < 3; ++k)
            m.vf_idx_[static_cast<std::size_t>(fill[static_cast<std::size_t>(m.faces_(f, k))]++)] = f;
    return m;
}

std::span<const Index> TriMesh::incident_faces(Index v) const {
    const auto b = vf_ptr_[static_cast<std::size_t>(v)];
    const auto e = vf_ptr_[static_cast<std::size_t>(v) + 1];
    return std::span<const Index>(vf_idx_).subspan(static_cast<std::size_t>(b), static_cast<std::size_t>(e - b));
}

double TriMesh::face_area(Index f) const {
    return 0.5 * twice_area(vertices_, faces_(f, 0), faces_(f, 1), faces_(f, 2));
}

double TriMesh::total_area() const {
    double s = 0.0;
    for (Index f = 0; f < num_faces(); ++f)
        s += face_area(f);
    return s;
}

MeshStats mesh_stats(const TriMesh& mesh) {
    MeshStats s;
    s.n_vertices = mesh.num_vertices();
    s.n_faces = mesh.num_faces();
    s.n_edges = mesh.num_edges();
    std::vector<Index> degree(static_cast<std::size_t>(s.n_vertices), 0);
    for (std::size_t e = 0; e < mesh.edges().size(); ++e) {
        const Edge& edge = mesh.edges()[e];
        ++degree[static_cast<std::size_t>(edge.a)];
        ++degree[static_cast<std::size_t>(edge.b)];
        if (mesh.edge_face_counts()[e] == 1)
            ++s.boundary_edge_count;
    }
    s.max_vertex_degree = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
    s.min_triangle_area = std::numeric_limits<double>::infinity();
    for (Index f = 0; f < s.n_faces; ++f)
        s.min_triangle_area = std::min(s.min_triangle_area, mesh.face_area(f));
    return s;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    /// Next line with comments stripped that still has tokens. False at EOF.
    bool next(std::vector<std::string_view>& tokens, bool strip_comments = true) {
        while (pos_ < text_.size()) {
            const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
            std::string_view line = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
            ++line_no_;
            if (strip_comments) {
                const auto hash = line.find('#');
                if (hash != std::string_view::npos)
                    line = line.substr(0, hash);
            }
            tokens.clear();
            std::size_t i = 0;
            while (i < line.size()) {
                while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
                    ++i;
                const std::size_t start = i;
                while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
                    ++i;
                if (i > start)
                    tokens.push_back(line.substr(start, i - start));
            }
            if (!tokens.empty())
                return true;
        }
        ++line_no_;
        return false;
    }

    std::size_t line() const noexcept { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

double to_double(std::string_view tok, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
    return v;
}

long long to_int(std::string_view tok, std::size_t line) {
    long long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
    return v;
}

TriMesh parse_off(std::string_view text, const MeshOptions& opts, MeshReport* report) {
    LineReader reader(text);
    std::vector<std::string_view> tok;
    if (!reader.next(tok))
        throw ParseError(reader.line(), "empty file");
    if (tok[0] != "OFF")
        throw ParseError(reader.line(), "expected 'OFF' header");
    std::vector<std::string_view> counts(tok.begin() + 1, tok.end());
    if (counts.empty()) {
        if (!reader.next(tok))
            throw ParseError(reader.line(), "missing vertex/face counts");
        counts = tok;
    }
    if (counts.size() < 2)
        throw ParseError(reader.line(), "expected vertex and face counts");
    const long long nv = to_int(counts[0], reader.line());
    const long long nf = to_int(counts[1], reader.line());
    if (nv < 0 || nf < 0)
        throw ParseError(reader.line(), "negative element count");

    VertexMat v(nv, 3);
    for (long long i = 0; i < nv; ++i) {
        if (!reader.next(tok))
            throw ParseError(reader.line(), "unexpected end of file: expected vertex " +
                                                std::to_string(i + 1) + " of " + std::to_string(nv));
        if (tok.size() != 3)
            throw ParseError(reader.line(), "expected 3 vertex coordinates, got " +
                                                std::to_string(tok.size()) + " tokens");
        for (int k = 0; k < 3; ++k)
            v(i, k) = to_double(tok[static_cast<std::size_t>(k)], reader.line());
    }
    FaceMat f(nf, 3);
    for (long long i = 0; i < nf; ++i) {
        if (!reader.next(tok))
            throw ParseError(reader.line(), "unexpected end of file: expected face " +
                                                std::to_string(i + 1) + " of " + std::to_string(nf));
        const long long count = to_int(tok[0], reader.line());
        if (count != 3)
            throw ParseError(reader.line(), "only triangular faces are supported");
        if (tok.size() < 4)
            throw ParseError(reader.line(), "face lists fewer than 3 indices");
        for (int k = 0; k < 3; ++k)
            f(i, k) = static_cast<Index>(to_int(tok[static_cast<std::size_t>(k) + 1], reader.line()));
    }
    return TriMesh::build(std::move(v), std::move(f), opts, report);
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    long long count = 0;
    std::vector<PlyProperty> props;
};

TriMesh parse_ply(std::string_view text, const MeshOptions& opts, MeshReport* report) {
    LineReader reader(text);
    std::vector<std::string_view> tok;
    if (!reader.next(tok, false) || tok[0] != "ply")
        throw ParseError(reader.line(), "expected 'ply' magic");
    std::vector<PlyElement> elements;
    bool ascii = false;
    for (;;) {
        if (!reader.next(tok, false))
            throw ParseError(reader.line(), "unexpected end of header");
        if (tok[0] == "end_header")
            break;
        if (tok[0] == "comment" || tok[0] == "obj_info")
            continue;
        if (tok[0] == "format") {
            if (tok.size() < 2 || tok[1] != "ascii")
                throw ParseError(reader.line(), "only ascii PLY is supported");
            ascii = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3)
                throw ParseError(reader.line(), "malformed element line");
            elements.push_back({std::string(tok[1]), to_int(tok[2], reader.line()), {}});
        } else if (tok[0] == "property") {
            if (elements.empty())
                throw ParseError(reader.line(), "property before any element");
            if (tok.size() >= 5 && tok[1] == "list")
                elements.back().props.push_back({std::string(tok[4]), true});
            else if (tok.size() == 3)
                elements.back().props.push_back({std::string(tok[2]), false});
            else
                throw ParseError(reader.line(), "malformed property line");
        } else {
            throw ParseError(reader.line(), "unknown header keyword '" + std::string(tok[0]) + "'");
        }
    }
    if (!ascii)
        throw ParseError(reader.line(), "missing format line");

    VertexMat v;
    FaceMat f;
    bool have_v = false, have_f = false;
    for (const PlyElement& el : elements) {
        if (el.count < 0)
            throw ParseError(reader.line(), "negative element count");
        int ix = -1, iy = -1, iz = -1, iface = -1;
        for (std::size_t p = 0; p < el.props.size(); ++p) {
            const auto& name = el.props[p].name;
            if (name == "x") ix = static_cast<int>(p);
            if (name == "y") iy = static_cast<int>(p);
            if (name == "z") iz = static_cast<int>(p);
            if (el.props[p].is_list && (name == "vertex_indices" || name == "vertex_index"))
                iface = static_cast<int>(p);
        }
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face";
        if (is_vertex) {
            if (ix < 0 || iy < 0 || iz < 0)
                throw ParseError(reader.line(), "vertex element lacks x/y/z properties");
            v.resize(el.count, 3);
            have_v = true;
        }
        if (is_face) {
            if (iface < 0)
                throw ParseError(reader.line(), "face element lacks vertex_indices");
            f.resize(el.count, 3);
            have_f = true;
        }
        for (long long i = 0; i < el.count; ++i) {
            if (!reader.next(tok, false))
                throw ParseError(reader.line(), "unexpected end of file in element '" + el.name + "'");
            std::size_t t = 0;
            for (std::size_t p = 0; p < el.props.size(); ++p) {
                if (t >= tok.size())
                    throw ParseError(reader.line(), "too few values in element '" + el.name + "'");
                if (el.props[p].is_list) {
                    const long long cnt = to_int(tok[t++], reader.line());
                    if (cnt < 0 || t + static_cast<std::size_t>(cnt) > tok.size())
                        throw ParseError(reader.line(), "list length exceeds line");
                    if (is_face && static_cast<int>(p) == iface) {
                        if (cnt != 3)
                            throw ParseError(reader.line(), "only triangular faces are supported");
                        for (int k = 0; k < 3; ++k)
                            f(i, k) = static_cast<Index>(to_int(tok[t + static_cast<std::size_t>(k)], reader.line()));
                    }
                    t += static_cast<std::size_t>(cnt);
                } else {
                    if (is_vertex) {
                        const int pi = static_cast<int>(p);
                        if (pi == ix) v(i, 0) = to_double(tok[t], reader.line());
                        if (pi == iy) v(i, 1) = to_double(tok[t], reader.line());
                        if (pi == iz) v(i, 2) = to_double(tok[t], reader.line());
                    }
                    ++t;
                }
            }
            if (t != tok.size())
                throw ParseError(reader.line(), "too many values in element '" + el.name + "'");
        }
    }
    if (!have_v || !have_f)
        throw ParseError(reader.line(), "PLY needs both vertex and face elements");
    return TriMesh::build(std::move(v), std::move(f), opts, report);
}

} // namespace

TriMesh parse_mesh(std::string_view text, MeshFormat format, const MeshOptions& opts, MeshReport* report) {
    return format == MeshFormat::off ? parse_off(text, opts, report) : parse_ply(text, opts, report);
}

MeshFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".off")
        return MeshFormat::off;
    if (ext == ".ply")
        return MeshFormat::ply_ascii;
    throw ParseError(0, "unrecognized mesh extension '" + ext + "'");
}

TriMesh load_mesh(const std::filesystem::path& path, const MeshOptions& opts, MeshReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_mesh(ss.str(), format_from_path(path), opts, report);
}

TriMesh make_sphere_mesh(int subdivisions) {
    if (subdivisions < 0)
        throw std::invalid_argument("make_sphere_mesh: subdivisions must be >= 0");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (auto& p : verts)
        p.normalize();
    std::vector<std::array<Index, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<Index, Index>, Index> midpoint;
        auto mid = [&](Index a, Index b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end())
                return it->second;
            verts.push_back((verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]).normalized());
            const Index id = static_cast<Index>(verts.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<Index, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& [a, b, c] : faces) {
            const Index ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
            next.push_back({a, ab, ca});
            next.push_back({b, bc, ab});
            next.push_back({c, ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    VertexMat v(static_cast<Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i)
        v.row(static_cast<Index>(i)) = verts[i].transpose();
    FaceMat f(static_cast<Index>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i)
        for (int k = 0; k < 3; ++k)
            f(static_cast<Index>(i), k) = faces[i][static_cast<std::size_t>(k)];
    return TriMesh::build(std::move(v), std::move(f));
}

std::string write_off(const TriMesh& mesh) {
    std::string out = "OFF\n" + std::to_string(mesh.num_vertices()) + " " + std::to_string(mesh.num_faces()) +
                      " " + std::to_string(mesh.num_edges()) + "\n";
    for (Index i = 0; i < mesh.num_vertices(); ++i)
        out += format_double(mesh.vertices()(i, 0)) + " " + format_double(mesh.vertices()(i, 1)) + " " +
               format_double(mesh.vertices()(i, 2)) + "\n";
    for (Index f = 0; f < mesh.num_faces(); ++f)
        out += "3 " + std::to_string(mesh.faces()(f, 0)) + " " + std::to_string(mesh.faces()(f, 1)) + " " +
               std::to_string(mesh.faces()(f, 2)) + "\n";
    return out;
}

std::string write_ply(const TriMesh& mesh, std::span<const Rgb> colors) {
    const bool with_color = !colors.empty();
    if (with_color && static_cast<Index>(colors.size()) != mesh.num_vertices())
        throw DimensionMismatch("write_ply: one color per vertex required");
    std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(mesh.num_vertices()) +
                      "\nproperty double x\nproperty double y\nproperty double z\n";
    if (with_color)
        out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "element face " + std::to_string(mesh.num_faces()) +
           "\nproperty list uchar int vertex_indices\nend_header\n";
    for (Index i = 0; i < mesh.num_vertices(); ++i) {
        out += format_double(mesh.vertices()(i, 0)) + " " + format_double(mesh.vertices()(i, 1)) + " " +
               format_double(mesh.vertices()(i, 2));
        if (with_color) {
            const Rgb& c = colors[static_cast<std::size_t>(i)];
            out += " " + std::to_string(c[0]) + " " + std::to_string(c[1]) + " " + std::to_string(c[2]);
        }
        out += "\n";
    }
    for (Index f = 0; f < mesh.num_faces(); ++f)
        out += "3 " + std::to_string(mesh.faces()(f, 0)) + " " + std::to_string(mesh.faces()(f, 1)) + " " +
               std::to_string(mesh.faces()(f, 2)) + "\n";
    return out;
}

} // namespace bha
