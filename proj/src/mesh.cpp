#include "elastix/mesh.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace elastix {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingularTol = 1e-9;

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

std::array<int, 3> sorted3(int a, int b, int c) {
    std::array<int, 3> t{a, b, c};
    std::sort(t.begin(), t.end());
    return t;
}

} // namespace

double TetMesh::tet_volume(int k) const {
    const auto& t = tets[static_cast<std::size_t>(k)];
    return signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
}

double TetMesh::face_area(int f) const {
    const auto& v = faces[static_cast<std::size_t>(f)].v;
    return 0.5 * (vertices[v[1]] - vertices[v[0]]).cross(vertices[v[2]] - vertices[v[0]]).norm();
}

Vec3 TetMesh::face_normal(int f) const {
    const auto& v = faces[static_cast<std::size_t>(f)].v;
    return (vertices[v[1]] - vertices[v[0]]).cross(vertices[v[2]] - vertices[v[0]]).normalized();
}

double TetMesh::edge_length(int e) const {
    const auto& v = edges[static_cast<std::size_t>(e)].v;
    return (vertices[v[1]] - vertices[v[0]]).norm();
}

double TetMesh::max_diameter() const {
    double h = 0;
    for (std::size_t k = 0; k < tets.size(); ++k) {
        const auto& t = tets[k];
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                h = std::max(h, (vertices[t[i]] - vertices[t[j]]).norm());
    }
    return h;
}

int TetMesh::num_boundary_faces() const {
    int n = 0;
    for (const auto& f : faces) n += f.boundary() ? 1 : 0;
    return n;
}

int TetMesh::num_interior_faces() const {
    return static_cast<int>(faces.size()) - num_boundary_faces();
}

int TetMesh::num_interior_edges() const {
    int n = 0;
    for (const auto& e : edges) n += e.boundary ? 0 : 1;
    return n;
}

int TetMesh::find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].v[0] == a && edges[i].v[1] == b) return static_cast<int>(i);
    return -1;
}

int TetMesh::find_face(int a, int b, int c) const {
    auto key = sorted3(a, b, c);
    for (std::size_t i = 0; i < faces.size(); ++i)
        if (faces[i].v == key) return static_cast<int>(i);
    return -1;
}

namespace {

/// Hanging-node detection: a vertex strictly inside another element's edge
/// or face breaks conformity. Overlapping-volume pathologies are out of the
/// scope of this check.
void check_conforming(const TetMesh& mesh) {
    const double h = mesh.max_diameter();
    const double tol = 1e-9 * h;
    for (std::size_t vi = 0; vi < mesh.vertices.size(); ++vi) {
        const Vec3& p = mesh.vertices[vi];
        for (const auto& e : mesh.edges) {
            if (static_cast<int>(vi) == e.v[0] || static_cast<int>(vi) == e.v[1]) continue;
            const Vec3& a = mesh.vertices[e.v[0]];
            const Vec3& b = mesh.vertices[e.v[1]];
            const Vec3 d = b - a;
            const double len2 = d.squaredNorm();
            const double s = (p - a).dot(d) / len2;
            if (s <= 1e-9 || s >= 1.0 - 1e-9) continue;
            if ((p - (a + s * d)).norm() < tol)
                throw MeshError(MeshError::Code::NonConforming,
                                "hanging node: vertex " + std::to_string(vi) + " lies inside an edge");
        }
        for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
            const auto& f = mesh.faces[fi];
            if (static_cast<int>(vi) == f.v[0] || static_cast<int>(vi) == f.v[1] || static_cast<int>(vi) == f.v[2])
                continue;
            const Vec3& a = mesh.vertices[f.v[0]];
            const Vec3& b = mesh.vertices[f.v[1]];
            const Vec3& c = mesh.vertices[f.v[2]];
            const Vec3 n = (b - a).cross(c - a);
            const double area2 = n.norm();
            if (std::abs((p - a).dot(n)) > tol * area2) continue;
            // barycentric test, strictly interior
            const Vec3 w = p - a;
            const Vec3 u = b - a, v = c - a;
            const double uu = u.dot(u), uv = u.dot(v), vv = v.dot(v);
            const double wu = w.dot(u), wv = w.dot(v);
            const double det = uu * vv - uv * uv;
            const double s = (vv * wu - uv * wv) / det;
            const double q = (uu * wv - uv * wu) / det;
            if (s > 1e-9 && q > 1e-9 && s + q < 1.0 - 1e-9)
                throw MeshError(MeshError::Code::NonConforming,
                                "hanging node: vertex " + std::to_string(vi) + " lies inside face " +
                                    std::to_string(fi));
        }
    }
}

} // namespace

TetMesh build_topology(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets) {
    TetMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.tets = std::move(tets);
    const int nv = static_cast<int>(mesh.vertices.size());

    double scale = 0;
    for (const auto& t : mesh.tets)
        for (int i : t) {
            if (i < 0 || i >= nv)
                throw MeshError(MeshError::Code::ParseError, "tet references invalid vertex " + std::to_string(i));
            scale = std::max(scale, mesh.vertices[i].norm());
        }
    if (scale == 0) scale = 1;

    std::set<std::array<int, 4>> seen;
    for (auto& t : mesh.tets) {
        std::array<int, 4> key = t;
        std::sort(key.begin(), key.end());
        if (key[0] == key[1] || key[1] == key[2] || key[2] == key[3])
            throw MeshError(MeshError::Code::DegenerateTet, "tet with repeated vertex");
        if (!seen.insert(key).second)
            throw MeshError(MeshError::Code::NonConforming, "duplicate tet");
        double vol = signed_volume(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                                   mesh.vertices[t[3]]);
        if (std::abs(vol) < 1e-14 * scale * scale * scale)
            throw MeshError(MeshError::Code::DegenerateTet, "tet with zero volume");
        if (vol < 0) std::swap(t[2], t[3]);
    }

    // faces
    std::map<std::array<int, 3>, int> face_ids;
    for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
        const auto& t = mesh.tets[k];
        const std::array<std::array<int, 3>, 4> tris = {
            sorted3(t[1], t[2], t[3]), sorted3(t[0], t[2], t[3]),
            sorted3(t[0], t[1], t[3]), sorted3(t[0], t[1], t[2])};
        for (const auto& tri : tris) {
            auto it = face_ids.find(tri);
            if (it == face_ids.end()) {
                Face f;
                f.v = tri;
                f.tets[0] = static_cast<int>(k);
                face_ids.emplace(tri, static_cast<int>(mesh.faces.size()));
                mesh.faces.push_back(f);
            } else {
                Face& f = mesh.faces[static_cast<std::size_t>(it->second)];
                if (f.tets[1] >= 0)
                    throw MeshError(MeshError::Code::NonConforming, "face shared by more than two tets");
                f.tets[1] = static_cast<int>(k);
            }
        }
    }

    // edges
    std::map<std::array<int, 2>, int> edge_ids;
    auto edge_id = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        std::array<int, 2> key{a, b};
        auto it = edge_ids.find(key);
        if (it != edge_ids.end()) return it->second;
        Edge e;
        e.v = key;
        edge_ids.emplace(key, static_cast<int>(mesh.edges.size()));
        mesh.edges.push_back(e);
        return static_cast<int>(mesh.edges.size()) - 1;
    };
    for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
        const auto& t = mesh.tets[k];
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                int e = edge_id(t[i], t[j]);
                auto& tl = mesh.edges[static_cast<std::size_t>(e)].tets;
                if (std::find(tl.begin(), tl.end(), static_cast<int>(k)) == tl.end())
                    tl.push_back(static_cast<int>(k));
            }
    }
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        Face& f = mesh.faces[fi];
        for (int i = 0; i < 3; ++i) {
            int a = f.v[i], b = f.v[(i + 1) % 3];
            int e = edge_id(a, b);
            f.edges[i] = e;
            mesh.edges[static_cast<std::size_t>(e)].faces.push_back(static_cast<int>(fi));
        }
    }
    for (const auto& f : mesh.faces)
        if (f.boundary())
            for (int e : f.edges) mesh.edges[static_cast<std::size_t>(e)].boundary = true;

    mesh.vertex_tets.assign(mesh.vertices.size(), {});
    for (std::size_t k = 0; k < mesh.tets.size(); ++k)
        for (int v : mesh.tets[k]) mesh.vertex_tets[static_cast<std::size_t>(v)].push_back(static_cast<int>(k));

    check_conforming(mesh);
    return mesh;
}

TetMesh gen_kuhn_box(int nx, int ny, int nz) {
    if (nx < 1 || ny < 1 || nz < 1)
        throw MeshError(MeshError::Code::ParseError, "gen_kuhn_box: counts must be >= 1");
    std::vector<Vec3> vertices;
    vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) * (nz + 1)));
    auto vid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) vertices.emplace_back(i, j, k);

    // the 6 permutations of the axis order, each one tet per cell
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<std::array<int, 4>> tets;
    tets.reserve(static_cast<std::size_t>(6 * nx * ny * nz));
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                int base[3] = {i, j, k};
                for (const auto& p : perms) {
                    int c[3] = {base[0], base[1], base[2]};
                    std::array<int, 4> tet{};
                    tet[0] = vid(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        c[p[s]] += 1;
                        tet[s + 1] = vid(c[0], c[1], c[2]);
                    }
                    tets.push_back(tet);
                }
            }
    return build_topology(std::move(vertices), std::move(tets));
}

TetMesh gen_kuhn_mesh(int n) {
    TetMesh box = gen_kuhn_box(n, n, n);
    std::vector<Vec3> vertices = box.vertices;
    for (auto& v : vertices) v /= static_cast<double>(n);
    return build_topology(std::move(vertices), std::move(box.tets));
}

TetMesh load_mesh_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError(MeshError::Code::ParseError, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw MeshError(MeshError::Code::ParseError, std::string("json parse: ") + e.what());
    }
    if (!j.contains("vertices") || !j.contains("tets"))
        throw MeshError(MeshError::Code::ParseError, "mesh json needs 'vertices' and 'tets'");
    std::vector<Vec3> vertices;
    for (const auto& v : j["vertices"]) {
        if (!v.is_array() || v.size() != 3)
            throw MeshError(MeshError::Code::ParseError, "vertex must be [x,y,z]");
        vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    std::vector<std::array<int, 4>> tets;
    for (const auto& t : j["tets"]) {
        if (!t.is_array() || t.size() != 4)
            throw MeshError(MeshError::Code::ParseError, "tet must be [i0,i1,i2,i3]");
        tets.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>(), t[3].get<int>()});
    }
    return build_topology(std::move(vertices), std::move(tets));
}

void save_mesh_json(const TetMesh& mesh, const std::string& path) {
    nlohmann::ordered_json j;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices) j["vertices"].push_back({v.x(), v.y(), v.z()});
    j["tets"] = nlohmann::json::array();
    for (const auto& t : mesh.tets) j["tets"].push_back({t[0], t[1], t[2], t[3]});
    std::ofstream out(path);
    if (!out) throw MeshError(MeshError::Code::ParseError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

TetMesh load_msh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError(MeshError::Code::ParseError, "cannot open " + path);
    std::string line;
    std::map<long, int> node_ids;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets;
    bool saw_nodes = false, saw_elements = false;
    while (std::getline(in, line)) {
        if (line.rfind("$MeshFormat", 0) == 0) {
            if (!std::getline(in, line)) throw MeshError(MeshError::Code::ParseError, "truncated $MeshFormat");
            std::istringstream ss(line);
            std::string version;
            ss >> version;
            if (version.rfind("2.", 0) != 0)
                throw MeshError(MeshError::Code::ParseError, "unsupported MSH version " + version);
        } else if (line.rfind("$Nodes", 0) == 0) {
            saw_nodes = true;
            if (!std::getline(in, line)) throw MeshError(MeshError::Code::ParseError, "truncated $Nodes");
            long n = std::stol(line);
            for (long i = 0; i < n; ++i) {
                if (!std::getline(in, line)) throw MeshError(MeshError::Code::ParseError, "truncated node list");
                std::istringstream ss(line);
                long id;
                double x, y, z;
                if (!(ss >> id >> x >> y >> z))
                    throw MeshError(MeshError::Code::ParseError, "bad node line: " + line);
                node_ids[id] = static_cast<int>(vertices.size());
                vertices.emplace_back(x, y, z);
            }
        } else if (line.rfind("$Elements", 0) == 0) {
            saw_elements = true;
            if (!std::getline(in, line)) throw MeshError(MeshError::Code::ParseError, "truncated $Elements");
            long n = std::stol(line);
            for (long i = 0; i < n; ++i) {
                if (!std::getline(in, line)) throw MeshError(MeshError::Code::ParseError, "truncated element list");
                std::istringstream ss(line);
                long id;
                int type, ntags;
                if (!(ss >> id >> type >> ntags))
                    throw MeshError(MeshError::Code::ParseError, "bad element line: " + line);
                for (int t = 0; t < ntags; ++t) {
                    long tag;
                    ss >> tag;
                }
                if (type == 15 || type == 1 || type == 2) continue; // points/lines/triangles: skipped
                if (type != 4)
                    throw MeshError(MeshError::Code::UnsupportedElementType,
                                    "element type " + std::to_string(type) + " not supported");
                std::array<int, 4> tet{};
                for (int s = 0; s < 4; ++s) {
                    long nid;
                    if (!(ss >> nid)) throw MeshError(MeshError::Code::ParseError, "bad tet line: " + line);
                    auto it = node_ids.find(nid);
                    if (it == node_ids.end())
                        throw MeshError(MeshError::Code::ParseError, "tet references unknown node " + std::to_string(nid));
                    tet[s] = it->second;
                }
                tets.push_back(tet);
            }
        }
    }
    if (!saw_nodes || !saw_elements)
        throw MeshError(MeshError::Code::ParseError, "missing $Nodes or $Elements block");
    return build_topology(std::move(vertices), std::move(tets));
}

void save_msh(const TetMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError(MeshError::Code::ParseError, "cannot write " + path);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << mesh.vertices.size() << "\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        out << (i + 1) << " " << v.x() << " " << v.y() << " " << v.z() << "\n";
    }
    out << "$EndNodes\n$Elements\n" << mesh.tets.size() << "\n";
    for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
        const auto& t = mesh.tets[k];
        out << (k + 1) << " 4 2 0 0 " << (t[0] + 1) << " " << (t[1] + 1) << " " << (t[2] + 1) << " "
            << (t[3] + 1) << "\n";
    }
    out << "$EndElements\n";
}

TetMesh load_mesh(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".json") return load_mesh_json(path);
    if (ext == ".msh") return load_msh(path);
    throw MeshError(MeshError::Code::ParseError, "unknown mesh format: " + path);
}

std::string to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Boundary: return "boundary";
        case EdgeKind::InteriorOdd: return "interior-odd";
        case EdgeKind::InteriorEvenNonsingular: return "interior-even";
        case EdgeKind::Singular: return "singular";
    }
    return "?";
}

double EdgePatch::theta_sum() const {
    double s = 0;
    for (double a : theta) s += a;
    return s;
}

EdgeKind classify_edge(bool interior, const std::vector<double>& theta) {
    if (!interior) return EdgeKind::Boundary;
    const int m = static_cast<int>(theta.size());
    if (m % 2 == 1) return EdgeKind::InteriorOdd;
    if (m == 4 && std::abs(theta[0] + theta[1] - kPi) <= kSingularTol &&
        std::abs(theta[1] + theta[2] - kPi) <= kSingularTol)
        return EdgeKind::Singular;
    return EdgeKind::InteriorEvenNonsingular;
}

EdgePatch build_edge_patch(const TetMesh& mesh, int edge, bool reverse) {
    if (edge < 0 || edge >= static_cast<int>(mesh.edges.size()))
        throw MeshError(MeshError::Code::ParseError, "no such edge");
    const Edge& e = mesh.edges[static_cast<std::size_t>(edge)];
    EdgePatch patch;
    patch.edge = edge;
    patch.interior = !e.boundary;

    const Vec3& a = mesh.vertices[e.v[0]];
    const Vec3& b = mesh.vertices[e.v[1]];
    Vec3 t = (b - a).normalized();
    if (reverse) t = -t;
    patch.t = t;

    // in-face direction towards the face's third vertex, projected off t
    auto face_dir = [&](int f) {
        const auto& fv = mesh.faces[static_cast<std::size_t>(f)].v;
        int c = -1;
        for (int v : fv)
            if (v != e.v[0] && v != e.v[1]) c = v;
        Vec3 w = mesh.vertices[c] - a;
        w -= w.dot(t) * t;
        return Vec3(w.normalized());
    };

    // other face of tet k containing this edge
    auto next_face_in_tet = [&](int k, int f) {
        int other = -1;
        for (int g : e.faces) {
            const Face& gf = mesh.faces[static_cast<std::size_t>(g)];
            if (g != f && (gf.tets[0] == k || gf.tets[1] == k)) other = g;
        }
        if (other < 0)
            throw MeshError(MeshError::Code::BrokenRing, "edge ring: tet lacks a second incident face");
        return other;
    };

    // positive-rotation step from face f: +1 if crossing tet k advances by
    // positive rotation about t
    auto step_sign = [&](int f, int k) {
        int g = next_face_in_tet(k, f);
        return face_dir(f).cross(face_dir(g)).dot(t) > 0 ? 1 : -1;
    };

    std::vector<int> boundary_faces;
    for (int f : e.faces)
        if (mesh.faces[static_cast<std::size_t>(f)].boundary()) boundary_faces.push_back(f);
    std::sort(boundary_faces.begin(), boundary_faces.end());

    int start_face = -1, start_tet = -1;
    if (patch.interior) {
        if (!boundary_faces.empty())
            throw MeshError(MeshError::Code::BrokenRing, "interior edge with boundary faces");
        start_face = *std::min_element(e.faces.begin(), e.faces.end());
        const Face& sf = mesh.faces[static_cast<std::size_t>(start_face)];
        start_tet = step_sign(start_face, sf.tets[0]) > 0 ? sf.tets[0] : sf.tets[1];
        if (step_sign(start_face, start_tet) <= 0)
            throw MeshError(MeshError::Code::BrokenRing, "no positive-rotation start");
    } else {
        if (boundary_faces.size() != 2)
            throw MeshError(MeshError::Code::BrokenRing, "boundary edge without exactly two boundary faces");
        for (int f : boundary_faces) {
            int k = mesh.faces[static_cast<std::size_t>(f)].tets[0];
            if (step_sign(f, k) > 0) {
                start_face = f;
                start_tet = k;
                break;
            }
        }
        if (start_face < 0)
            throw MeshError(MeshError::Code::BrokenRing, "no positive-rotation boundary start");
    }

    const int m = static_cast<int>(e.tets.size());
    patch.faces.push_back(start_face);
    int f = start_face, k = start_tet;
    for (int step = 0; step < m; ++step) {
        patch.elements.push_back(k);
        int g = next_face_in_tet(k, f);
        patch.faces.push_back(g);
        if (step + 1 == m) break;
        const Face& gf = mesh.faces[static_cast<std::size_t>(g)];
        int k2 = gf.tets[0] == k ? gf.tets[1] : gf.tets[0];
        if (k2 < 0) throw MeshError(MeshError::Code::BrokenRing, "walk hit the boundary early");
        if (std::find(patch.elements.begin(), patch.elements.end(), k2) != patch.elements.end())
            throw MeshError(MeshError::Code::BrokenRing, "walk revisits an element");
        f = g;
        k = k2;
    }
    if (patch.interior && patch.faces.back() != start_face)
        throw MeshError(MeshError::Code::BrokenRing, "interior ring does not close");
    if (!patch.interior && !mesh.faces[static_cast<std::size_t>(patch.faces.back())].boundary())
        throw MeshError(MeshError::Code::BrokenRing, "boundary walk does not end on the boundary");

    patch.n.resize(static_cast<std::size_t>(m + 1));
    patch.tf.resize(static_cast<std::size_t>(m + 1));
    patch.theta.resize(static_cast<std::size_t>(m));
    std::vector<Vec3> w(static_cast<std::size_t>(m + 1));
    for (int j = 0; j <= m; ++j) {
        w[static_cast<std::size_t>(j)] = face_dir(patch.faces[static_cast<std::size_t>(j)]);
        patch.n[static_cast<std::size_t>(j)] = t.cross(w[static_cast<std::size_t>(j)]);
        patch.tf[static_cast<std::size_t>(j)] = patch.n[static_cast<std::size_t>(j)].cross(t);
    }
    for (int j = 0; j < m; ++j) {
        const Vec3& wj = w[static_cast<std::size_t>(j)];
        const Vec3& wn = w[static_cast<std::size_t>(j + 1)];
        patch.theta[static_cast<std::size_t>(j)] = std::atan2(wj.cross(wn).dot(t), wj.dot(wn));
        if (patch.theta[static_cast<std::size_t>(j)] <= 0)
            throw MeshError(MeshError::Code::BrokenRing, "non-positive dihedral angle in walk");
    }
    patch.kind = classify_edge(patch.interior, patch.theta);
    return patch;
}

std::vector<EdgePatch> build_all_patches(const TetMesh& mesh) {
    std::vector<EdgePatch> patches;
    patches.reserve(mesh.edges.size());
    for (std::size_t e = 0; e < mesh.edges.size(); ++e)
        patches.push_back(build_edge_patch(mesh, static_cast<int>(e)));
    return patches;
}

EdgePatch rotate_patch(const EdgePatch& patch, int start) {
    if (!patch.interior)
        throw MeshError(MeshError::Code::BrokenRing, "rotate_patch needs an interior patch");
    const int m = patch.size();
    start = ((start % m) + m) % m;
    EdgePatch out = patch;
    for (int j = 0; j < m; ++j) {
        const int s = (start + j) % m;
        if (!patch.elements.empty())
            out.elements[static_cast<std::size_t>(j)] = patch.elements[static_cast<std::size_t>(s)];
        out.faces[static_cast<std::size_t>(j)] = patch.faces[static_cast<std::size_t>(s)];
        out.n[static_cast<std::size_t>(j)] = patch.n[static_cast<std::size_t>(s)];
        out.tf[static_cast<std::size_t>(j)] = patch.tf[static_cast<std::size_t>(s)];
        out.theta[static_cast<std::size_t>(j)] = patch.theta[static_cast<std::size_t>(s)];
    }
    out.faces[static_cast<std::size_t>(m)] = out.faces[0];
    out.n[static_cast<std::size_t>(m)] = out.n[0];
    out.tf[static_cast<std::size_t>(m)] = out.tf[0];
    out.kind = classify_edge(true, out.theta);
    return out;
}

double AssumptionReport::worst_violation() const {
    double w = 0;
    if (!clause1_pass) w = std::max(w, -clause1_margin);
    if (clause2_applicable && !clause2_pass) w = std::max(w, -clause2_margin);
    return w;
}

AssumptionReport check_assumption(const EdgePatch& patch, double kappa) {
    AssumptionReport rep;
    rep.kappa = kappa;
    const int m = patch.size();
    rep.clause1_margin = std::numeric_limits<double>::infinity();
    for (double th : patch.theta)
        rep.clause1_margin = std::min(rep.clause1_margin, std::min(th - kappa, kPi - kappa - th));
    rep.clause1_pass = rep.clause1_margin > 0;

    rep.clause2_applicable = patch.kind == EdgeKind::InteriorEvenNonsingular;
    if (rep.clause2_applicable) {
        rep.clause2_margin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
            const double s = patch.theta[static_cast<std::size_t>(j)] +
                             patch.theta[static_cast<std::size_t>((j + 1) % m)];
            rep.clause2_margin = std::min(rep.clause2_margin, (kPi - kappa) - s);
        }
        rep.clause2_pass = rep.clause2_margin > 0;
    }
    return rep;
}

} // namespace elastix
