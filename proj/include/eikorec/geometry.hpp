#ifndef EIKOREC_GEOMETRY_HPP
#define EIKOREC_GEOMETRY_HPP

#include <array>
#include <string>
#include <vector>

#include "eikorec/errors.hpp"
#include "eikorec/linalg.hpp"
#include "eikorec/vec2.hpp"

namespace eikorec {

// Disk-shaped activation site: boundary polygon inscribed in the circle.
struct HoleSpec {
    Vec2 center;
    double radius = 0.0;
};

enum class DomainKind { HOLED, FULL };

// Boundary / interface edge tags: kOuterTag for the rectangle boundary,
// i >= 0 for the polygon of hole i.
constexpr int kOuterTag = -1;
constexpr int kUntagged = -2;

struct BoundaryEdge {
    index_t a = 0;
    index_t b = 0;
    int tag = kOuterTag;
};

// Conforming triangulation of the unit square, either with the activation
// disks removed (HOLED) or fully meshed with the circles kept as interior
// interfaces (FULL). Immutable after generation/loading.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<index_t, 3>> triangles; // CCW
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<HoleSpec> hole_specs;
    DomainKind domain_kind = DomainKind::HOLED;

    // 0 = Omega, i + 1 = interior of hole i (FULL meshes only use > 0).
    std::vector<int> triangle_region;

    // Derived quantities, filled by finalize().
    std::vector<double> areas;
    std::vector<Vec2> centroids;
    std::vector<std::array<Vec2, 3>> basis_gradients;
    std::vector<std::vector<index_t>> vertex_triangles; // ascending
    std::vector<int> vertex_tag;                        // kUntagged / kOuterTag / hole id
    std::vector<index_t> outer_vertices;                // ascending arc length
    std::vector<double> outer_arclength;                // s in [0, 4)

    index_t vertex_count() const { return static_cast<index_t>(vertices.size()); }
    index_t triangle_count() const { return static_cast<index_t>(triangles.size()); }
    int hole_count() const { return static_cast<int>(hole_specs.size()); }

    double total_area() const;
    double min_angle_deg() const;

    // Computes derived data and checks orientation; throws MeshError.
    void finalize();
};

// Arc length along the unit-square boundary, CCW from (0,0).
double square_arclength(Vec2 p);

// Checks the HoleSpec invariants (clearance >= radius/2 from the square,
// pairwise gap >= min of the pair's radii). Throws GeometryError.
void validate_holes(const std::vector<HoleSpec>& holes);
bool holes_feasible(const std::vector<HoleSpec>& holes);

// Constrained Delaunay triangulation of the square with sampled circles,
// Ruppert-refined to a 20 degree minimum angle and edge length <= 1.5 h.
// HOLED meshes are the Omega-submesh of the FULL mesh, so the two kinds
// share circle vertices and edges by construction. `variant` seeds the
// deterministic interior-point jitter; different variants give independent
// triangulations of the same geometry.
Mesh generate_mesh(const std::vector<HoleSpec>& holes, double target_h, DomainKind kind,
                   std::uint64_t variant = 0);

struct SubmeshResult {
    Mesh mesh;                       // HOLED
    std::vector<index_t> vertex_map; // holed vertex -> full vertex
};

SubmeshResult extract_submesh(const Mesh& full);

void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

} // namespace eikorec

#endif
