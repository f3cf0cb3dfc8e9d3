#ifndef EIKOREC_FEM_HPP
#define EIKOREC_FEM_HPP

#include <array>
#include <functional>
#include <vector>

#include "eikorec/geometry.hpp"
#include "eikorec/linalg.hpp"

namespace eikorec {

// Conduction tensor M(x): SPD 2x2 with spatial derivative, used at element
// centroids (one-point quadrature; exact for P1 gradients).
struct ConductivityModel {
    std::function<Mat2(Vec2)> tensor;
    std::function<std::array<Mat2, 2>(Vec2)> tensor_derivative; // (dM/dx, dM/dy)
    double ellipticity = 1.0;

    static ConductivityModel identity();
    // diag(sin(pi x) + 1.1, sin(pi y) + 1.1)
    static ConductivityModel paper_sine();
    static ConductivityModel constant(Mat2 m);
};

struct PhysicsParams {
    double epsilon = 0.1;
    double beta = 0.0;
    ConductivityModel conductivity = ConductivityModel::paper_sine();

    void validate() const;
};

struct NodalField {
    const Mesh* mesh = nullptr;
    std::vector<double> values;

    NodalField() = default;
    NodalField(const Mesh& m, double fill = 0.0) : mesh(&m), values(m.vertex_count(), fill) {}
    NodalField(const Mesh& m, std::vector<double> v) : mesh(&m), values(std::move(v)) {}
};

// Constant Dirichlet value u_i per hole boundary. The nodal override is the
// generalized non-constant path used by manufactured-solution tests.
struct DirichletMap {
    const Mesh* mesh = nullptr;
    std::vector<double> hole_values;
    std::vector<std::vector<index_t>> hole_vertices;
    std::vector<double> nodal_override; // per-vertex; empty unless testing

    static DirichletMap constants(const Mesh& mesh, std::vector<double> u);
    static DirichletMap nodal(const Mesh& mesh, const std::vector<double>& boundary_values);

    bool constrained(index_t v) const { return mesh->vertex_tag[v] >= 0; }
    double value_at(index_t v) const {
        return nodal_override.empty() ? hole_values[mesh->vertex_tag[v]] : nodal_override[v];
    }
};

// Optional Neumann datum on Gamma_N (test-only; the model problem has the
// natural zero-flux condition). Arguments: point, outward unit normal.
using OuterNeumann = std::function<double(Vec2, Vec2)>;

// CSR pattern of the P1 vertex connectivity (diagonal included), values zero.
SparseMatrix build_pattern(const Mesh& mesh);

// A_ij = eps * int M grad(phi_j) . grad(phi_i)
SparseMatrix assemble_stiffness(const Mesh& mesh, const PhysicsParams& params);

// Exact P1 mass matrix.
SparseMatrix assemble_mass(const Mesh& mesh);

// residual_i = eps int M grad(T).grad(phi_i) + int sqrt(beta + |grad T|_M^2) phi_i
//              - int rhs phi_i  - int_{Gamma_N} gN phi_i ds     (free rows)
// residual_i = T_i - u_i                                        (constrained rows)
std::vector<double> eikonal_residual(const NodalField& T, const PhysicsParams& params,
                                     const DirichletMap& dirichlet, const NodalField& rhs,
                                     const OuterNeumann* neumann = nullptr);

// stiffness + C(T), C_ij = int (M grad T . grad phi_j / sqrt(beta + |grad T|_M^2)) phi_i.
// At beta = 0 elements with |grad T|_M <= 1e-14 use the zero branch.
SparseMatrix assemble_linearized_operator(const NodalField& T, const PhysicsParams& params);

// Row replacement + symmetric column elimination into b.
void apply_dirichlet(SparseMatrix& A, std::vector<double>& b, const DirichletMap& dirichlet);

// Pre-elimination system a solved field satisfies; used for consistent fluxes.
struct ResidualContext {
    const SparseMatrix* matrix = nullptr;
    const std::vector<double>* load = nullptr;
    const Mesh* mesh = nullptr;
};

// Consistent flux -eps int_{Gamma_i} M grad(field) . n ds, computed as
// -sum_{j in Gamma_i} (A field - b)_j with the pre-elimination system.
double boundary_flux(const NodalField& field, int hole_index, const ResidualContext& context);

// Values at OUTER vertices in arc-length order.
std::vector<double> outer_boundary_restrict(const NodalField& field);

// L2(Gamma_N) inner product / norm of P1 traces given at OUTER vertices in
// arc-length order (edgewise Simpson, exact for the quadratic products).
double outer_boundary_inner(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b);
double outer_boundary_l2(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b);

// Nodal load vector of int_{Gamma_N} h v ds for h given at OUTER vertices
// in arc-length order (exact P1 edge formula).
std::vector<double> outer_boundary_load(const Mesh& mesh, const std::vector<double>& h);

// One-point-quadrature volume load int rhs phi_i.
std::vector<double> assemble_volume_load(const Mesh& mesh, const NodalField& rhs);

// Edgewise-integrated Neumann load on Gamma_N (2-point Gauss per edge).
std::vector<double> assemble_outer_neumann_load(const Mesh& mesh, const OuterNeumann& g);

Vec2 element_gradient(const Mesh& mesh, const std::vector<double>& values, index_t t);

// Volume norms (exact P1 mass matrix / unit stiffness).
double l2_norm(const Mesh& mesh, const std::vector<double>& v);
double h1_norm(const Mesh& mesh, const std::vector<double>& v);

} // namespace eikorec

#endif
