#include "eikorec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace eikorec {

double square_arclength(Vec2 p) {
    const double tol = 1e-9;
    if (std::abs(p.y) <= tol) return p.x;
    if (std::abs(p.x - 1.0) <= tol) return 1.0 + p.y;
    if (std::abs(p.y - 1.0) <= tol) return 3.0 - p.x;
    if (std::abs(p.x) <= tol) return 4.0 - p.y;
    throw GeometryError("square_arclength: point not on the unit-square boundary");
}

double Mesh::total_area() const {
    double s = 0.0;
    for (double a : areas) s += a;
    return s;
}

double Mesh::min_angle_deg() const {
    double worst = 180.0;
    for (const auto& t : triangles) {
        Vec2 p[3] = {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
        for (int j = 0; j < 3; ++j) {
            Vec2 u = p[(j + 1) % 3] - p[j];
            Vec2 v = p[(j + 2) % 3] - p[j];
            double ang = std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
            worst = std::min(worst, ang * 180.0 / M_PI);
        }
    }
    return worst;
}

void Mesh::finalize() {
    const index_t nv = vertex_count();
    const index_t nt = triangle_count();

    areas.assign(nt, 0.0);
    centroids.assign(nt, Vec2{});
    basis_gradients.assign(nt, {});
    vertex_triangles.assign(nv, {});

    for (index_t t = 0; t < nt; ++t) {
        const auto& tr = triangles[t];
        Vec2 p0 = vertices[tr[0]], p1 = vertices[tr[1]], p2 = vertices[tr[2]];
        double twice = (p1 - p0).cross(p2 - p0);
        if (twice <= 0.0)
            throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
        areas[t] = 0.5 * twice;
        centroids[t] = (p0 + p1 + p2) / 3.0;
        // grad of the P1 basis of vertex k: rotate the opposite edge.
        basis_gradients[t][0] = Vec2{p1.y - p2.y, p2.x - p1.x} / twice;
        basis_gradients[t][1] = Vec2{p2.y - p0.y, p0.x - p2.x} / twice;
        basis_gradients[t][2] = Vec2{p0.y - p1.y, p1.x - p0.x} / twice;
        for (int k = 0; k < 3; ++k) vertex_triangles[tr[k]].push_back(t);
    }

    if (triangle_region.empty()) {
        // Rebuild region labels from the hole circles (interfaces are
        // edge-resolved, so the centroid test is unambiguous).
        triangle_region.assign(nt, 0);
        for (index_t t = 0; t < nt; ++t) {
            for (int i = 0; i < hole_count(); ++i) {
                if ((centroids[t] - hole_specs[i].center).norm() < hole_specs[i].radius) {
                    triangle_region[t] = i + 1;
                    break;
                }
            }
        }
    }

    vertex_tag.assign(nv, kUntagged);
    for (const BoundaryEdge& e : boundary_edges) {
        for (index_t v : {e.a, e.b}) {
            if (vertex_tag[v] != kUntagged && vertex_tag[v] != e.tag)
                throw MeshError("vertex " + std::to_string(v) + " carries two boundary tags");
            vertex_tag[v] = e.tag;
        }
    }

    outer_vertices.clear();
    outer_arclength.clear();
    std::vector<std::pair<double, index_t>> order;
    for (index_t v = 0; v < nv; ++v) {
        if (vertex_tag[v] == kOuterTag) order.emplace_back(square_arclength(vertices[v]), v);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [s, v] : order) {
        outer_arclength.push_back(s);
        outer_vertices.push_back(v);
    }
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IOError("cannot open " + path + " for writing");
    std::fprintf(f, "eikorec-mesh v1\n");
    std::fprintf(f, "%d %d %d\n", mesh.vertex_count(), mesh.triangle_count(),
                 static_cast<int>(mesh.boundary_edges.size()));
    for (const Vec2& p : mesh.vertices)
        std::fprintf(f, "%.17g %.17g\n", p.x, p.y);
    for (const auto& t : mesh.triangles)
        std::fprintf(f, "%d %d %d\n", t[0], t[1], t[2]);
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        if (e.tag == kOuterTag)
            std::fprintf(f, "%d %d OUTER\n", e.a, e.b);
        else
            std::fprintf(f, "%d %d HOLE:%d\n", e.a, e.b, e.tag);
    }
    // Trailing metadata (readers may omit it; see README).
    for (const HoleSpec& h : mesh.hole_specs)
        std::fprintf(f, "hole %.17g %.17g %.17g\n", h.center.x, h.center.y, h.radius);
    std::fprintf(f, "kind %s\n", mesh.domain_kind == DomainKind::FULL ? "FULL" : "HOLED");
    if (std::fclose(f) != 0) throw IOError("write to " + path + " failed");
}

namespace {

bool next_line(std::istream& in, std::string& line, long& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty()) return true;
    }
    return false;
}

} // namespace

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    long lineno = 0;
    std::string line;

    if (!next_line(in, line, lineno) || line != "eikorec-mesh v1")
        throw FormatError("expected header 'eikorec-mesh v1'", lineno);
    if (!next_line(in, line, lineno))
        throw FormatError("missing counts line", lineno);
    long nv = 0, nt = 0, nb = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> nv >> nt >> nb) || nv < 0 || nt < 0 || nb < 0)
            throw FormatError("bad counts line", lineno);
    }

    Mesh mesh;
    mesh.vertices.reserve(nv);
    for (long k = 0; k < nv; ++k) {
        if (!next_line(in, line, lineno)) throw FormatError("truncated vertex block", lineno);
        std::istringstream ss(line);
        double x, y;
        if (!(ss >> x >> y)) throw FormatError("bad vertex line", lineno);
        mesh.vertices.push_back({x, y});
    }
    mesh.triangles.reserve(nt);
    for (long k = 0; k < nt; ++k) {
        if (!next_line(in, line, lineno)) throw FormatError("truncated triangle block", lineno);
        std::istringstream ss(line);
        long i, j, l;
        if (!(ss >> i >> j >> l)) throw FormatError("bad triangle line", lineno);
        if (i < 0 || i >= nv || j < 0 || j >= nv || l < 0 || l >= nv)
            throw FormatError("triangle index out of range", lineno);
        Vec2 a = mesh.vertices[i], b = mesh.vertices[j], c = mesh.vertices[l];
        if ((b - a).cross(c - a) <= 0.0)
            throw FormatError("triangle is not counterclockwise", lineno);
        mesh.triangles.push_back({static_cast<index_t>(i), static_cast<index_t>(j), static_cast<index_t>(l)});
    }
    for (long k = 0; k < nb; ++k) {
        if (!next_line(in, line, lineno)) throw FormatError("truncated boundary block", lineno);
        std::istringstream ss(line);
        long i, j;
        std::string tag;
        if (!(ss >> i >> j >> tag)) throw FormatError("bad boundary line", lineno);
        if (i < 0 || i >= nv || j < 0 || j >= nv)
            throw FormatError("boundary index out of range", lineno);
        BoundaryEdge e;
        e.a = static_cast<index_t>(i);
        e.b = static_cast<index_t>(j);
        if (tag == "OUTER") {
            e.tag = kOuterTag;
        } else if (tag.rfind("HOLE:", 0) == 0) {
            try {
                e.tag = std::stoi(tag.substr(5));
            } catch (const std::exception&) {
                throw FormatError("bad HOLE tag", lineno);
            }
        } else {
            throw FormatError("unknown boundary tag '" + tag + "'", lineno);
        }
        mesh.boundary_edges.push_back(e);
    }

    // Optional trailing metadata.
    bool kind_seen = false;
    while (next_line(in, line, lineno)) {
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "hole") {
            HoleSpec h;
            if (!(ss >> h.center.x >> h.center.y >> h.radius))
                throw FormatError("bad hole metadata line", lineno);
            mesh.hole_specs.push_back(h);
        } else if (word == "kind") {
            std::string k;
            if (!(ss >> k) || (k != "HOLED" && k != "FULL"))
                throw FormatError("bad kind metadata line", lineno);
            mesh.domain_kind = k == "FULL" ? DomainKind::FULL : DomainKind::HOLED;
            kind_seen = true;
        } else {
            throw FormatError("unexpected trailing line", lineno);
        }
    }

    if (mesh.hole_specs.empty()) {
        // Fit circles from the tagged vertices.
        std::map<int, std::vector<Vec2>> ring;
        for (const BoundaryEdge& e : mesh.boundary_edges) {
            if (e.tag < 0) continue;
            ring[e.tag].push_back(mesh.vertices[e.a]);
            ring[e.tag].push_back(mesh.vertices[e.b]);
        }
        int max_tag = -1;
        for (const auto& kv : ring) max_tag = std::max(max_tag, kv.first);
        mesh.hole_specs.resize(max_tag + 1);
        for (const auto& [tag, pts] : ring) {
            Vec2 c{0, 0};
            for (Vec2 p : pts) c += p;
            c = c / static_cast<double>(pts.size());
            double r = 0.0;
            for (Vec2 p : pts) r += (p - c).norm();
            mesh.hole_specs[tag] = {c, r / static_cast<double>(pts.size())};
        }
    }
    if (!kind_seen) {
        // FULL iff some hole interface edge is shared by two triangles.
        std::map<std::pair<index_t, index_t>, int> count;
        for (const auto& t : mesh.triangles) {
            for (int j = 0; j < 3; ++j) {
                index_t a = t[j], b = t[(j + 1) % 3];
                if (a > b) std::swap(a, b);
                count[{a, b}]++;
            }
        }
        mesh.domain_kind = DomainKind::HOLED;
        for (const BoundaryEdge& e : mesh.boundary_edges) {
            if (e.tag < 0) continue;
            index_t a = e.a, b = e.b;
            if (a > b) std::swap(a, b);
            if (count[{a, b}] == 2) {
                mesh.domain_kind = DomainKind::FULL;
                break;
            }
        }
    }

    mesh.finalize();
    return mesh;
}

} // namespace eikorec
