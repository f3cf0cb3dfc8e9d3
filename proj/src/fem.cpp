#include "eikorec/fem.hpp"

#include <algorithm>
#include <cmath>

namespace eikorec {

ConductivityModel ConductivityModel::identity() {
    ConductivityModel m;
    m.tensor = [](Vec2) { return Mat2::identity(); };
    m.tensor_derivative = [](Vec2) { return std::array<Mat2, 2>{Mat2{}, Mat2{}}; };
    m.ellipticity = 1.0;
    return m;
}

ConductivityModel ConductivityModel::paper_sine() {
    ConductivityModel m;
    m.tensor = [](Vec2 p) { return Mat2::diag(std::sin(M_PI * p.x) + 1.1, std::sin(M_PI * p.y) + 1.1); };
    m.tensor_derivative = [](Vec2 p) {
        Mat2 dx = Mat2::diag(M_PI * std::cos(M_PI * p.x), 0.0);
        Mat2 dy = Mat2::diag(0.0, M_PI * std::cos(M_PI * p.y));
        return std::array<Mat2, 2>{dx, dy};
    };
    m.ellipticity = 0.1;
    return m;
}

ConductivityModel ConductivityModel::constant(Mat2 c) {
    ConductivityModel m;
    m.tensor = [c](Vec2) { return c; };
    m.tensor_derivative = [](Vec2) { return std::array<Mat2, 2>{Mat2{}, Mat2{}}; };
    double tr = c.a11 + c.a22;
    double det = c.a11 * c.a22 - c.a12 * c.a21;
    m.ellipticity = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    return m;
}

void PhysicsParams::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("beta must lie in [0, 1]");
}

DirichletMap DirichletMap::constants(const Mesh& mesh, std::vector<double> u) {
    if (static_cast<int>(u.size()) != mesh.hole_count())
        throw std::invalid_argument("DirichletMap: one value per hole required");
    DirichletMap d;
    d.mesh = &mesh;
    d.hole_values = std::move(u);
    d.hole_vertices.assign(mesh.hole_count(), {});
    for (index_t v = 0; v < mesh.vertex_count(); ++v)
        if (mesh.vertex_tag[v] >= 0) d.hole_vertices[mesh.vertex_tag[v]].push_back(v);
    return d;
}

DirichletMap DirichletMap::nodal(const Mesh& mesh, const std::vector<double>& boundary_values) {
    DirichletMap d = constants(mesh, std::vector<double>(mesh.hole_count(), 0.0));
    d.nodal_override = boundary_values;
    return d;
}

SparseMatrix build_pattern(const Mesh& mesh) {
    const index_t nv = mesh.vertex_count();
    std::vector<index_t> offsets(nv + 1, 0);
    std::vector<std::vector<index_t>> cols(nv);
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < nv; ++i) {
        std::vector<index_t>& c = cols[i];
        c.push_back(i);
        for (index_t t : mesh.vertex_triangles[i])
            for (index_t v : mesh.triangles[t]) c.push_back(v);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    for (index_t i = 0; i < nv; ++i) offsets[i + 1] = offsets[i] + static_cast<index_t>(cols[i].size());
    std::vector<index_t> col_indices(offsets[nv]);
    std::vector<double> values(offsets[nv], 0.0);
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < nv; ++i)
        std::copy(cols[i].begin(), cols[i].end(), col_indices.begin() + offsets[i]);
    return SparseMatrix(nv, nv, std::move(offsets), std::move(col_indices), std::move(values));
}

namespace detail {

// Shared two-phase assembly: local element matrices in parallel, then a
// row-parallel gather in ascending element order (bit-identical for any
// thread count, and identical to the serial reference's scatter order).
template <typename LocalFn>
SparseMatrix assemble_matrix(const Mesh& mesh, LocalFn&& local) {
    const index_t nt = mesh.triangle_count();
    const index_t nv = mesh.vertex_count();
    std::vector<double> locals(static_cast<std::size_t>(nt) * 9);
#pragma omp parallel for schedule(static)
    for (index_t t = 0; t < nt; ++t) {
        double le[9];
        local(t, le);
        std::copy(le, le + 9, locals.begin() + static_cast<std::size_t>(t) * 9);
    }
    SparseMatrix A = build_pattern(mesh);
    const auto& offsets = A.row_offsets();
    const auto& colidx = A.col_indices();
    auto& vals = A.values();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < nv; ++i) {
        for (index_t t : mesh.vertex_triangles[i]) {
            const auto& tr = mesh.triangles[t];
            int a = tr[0] == i ? 0 : (tr[1] == i ? 1 : 2);
            const double* le = locals.data() + static_cast<std::size_t>(t) * 9;
            for (int b = 0; b < 3; ++b) {
                index_t j = tr[b];
                auto first = colidx.begin() + offsets[i];
                auto last = colidx.begin() + offsets[i + 1];
                auto it = std::lower_bound(first, last, j);
                vals[it - colidx.begin()] += le[a * 3 + b];
            }
        }
    }
    return A;
}

template <typename LocalFn>
std::vector<double> assemble_vector(const Mesh& mesh, LocalFn&& local) {
    const index_t nt = mesh.triangle_count();
    const index_t nv = mesh.vertex_count();
    std::vector<double> locals(static_cast<std::size_t>(nt) * 3);
#pragma omp parallel for schedule(static)
    for (index_t t = 0; t < nt; ++t) {
        double le[3];
        local(t, le);
        std::copy(le, le + 3, locals.begin() + static_cast<std::size_t>(t) * 3);
    }
    std::vector<double> out(nv, 0.0);
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < nv; ++i) {
        double acc = 0.0;
        for (index_t t : mesh.vertex_triangles[i]) {
            const auto& tr = mesh.triangles[t];
            int a = tr[0] == i ? 0 : (tr[1] == i ? 1 : 2);
            acc += locals[static_cast<std::size_t>(t) * 3 + a];
        }
        out[i] = acc;
    }
    return out;
}

void stiffness_local(const Mesh& mesh, const PhysicsParams& params, index_t t, double* le) {
    Mat2 M = params.conductivity.tensor(mesh.centroids[t]);
    const auto& g = mesh.basis_gradients[t];
    const double w = params.epsilon * mesh.areas[t];
    for (int a = 0; a < 3; ++a) {
        Vec2 Mg = M * g[a];
        for (int b = 0; b < 3; ++b) le[a * 3 + b] = w * (Mg.dot(g[b]));
    }
}

// Gradient-direction coefficient of the linearization: B(x, grad T).
Vec2 linearization_coefficient(const Mesh& mesh, const PhysicsParams& params,
                               const std::vector<double>& T, index_t t, Mat2 M) {
    Vec2 gT = element_gradient(mesh, T, t);
    double q = (M * gT).dot(gT);
    double norm_m = std::sqrt(std::max(0.0, q));
    if (params.beta == 0.0 && norm_m <= 1e-14) return {0.0, 0.0};
    return (M * gT) / std::sqrt(params.beta + q);
}

} // namespace detail

SparseMatrix assemble_stiffness(const Mesh& mesh, const PhysicsParams& params) {
    params.validate();
    return detail::assemble_matrix(mesh, [&](index_t t, double* le) {
        detail::stiffness_local(mesh, params, t, le);
    });
}

SparseMatrix assemble_mass(const Mesh& mesh) {
    return detail::assemble_matrix(mesh, [&](index_t t, double* le) {
        const double w = mesh.areas[t] / 12.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) le[a * 3 + b] = a == b ? 2.0 * w : w;
    });
}

SparseMatrix assemble_linearized_operator(const NodalField& T, const PhysicsParams& params) {
    params.validate();
    const Mesh& mesh = *T.mesh;
    return detail::assemble_matrix(mesh, [&](index_t t, double* le) {
        detail::stiffness_local(mesh, params, t, le);
        Mat2 M = params.conductivity.tensor(mesh.centroids[t]);
        Vec2 B = detail::linearization_coefficient(mesh, params, T.values, t, M);
        const auto& g = mesh.basis_gradients[t];
        const double w = mesh.areas[t] / 3.0; // phi_i at the centroid
        for (int b = 0; b < 3; ++b) {
            double col = w * B.dot(g[b]);
            for (int a = 0; a < 3; ++a) le[a * 3 + b] += col;
        }
    });
}

std::vector<double> eikonal_residual(const NodalField& T, const PhysicsParams& params,
                                     const DirichletMap& dirichlet, const NodalField& rhs,
                                     const OuterNeumann* neumann) {
    params.validate();
    const Mesh& mesh = *T.mesh;
    if (dirichlet.mesh != &mesh || rhs.mesh != &mesh)
        throw ContextMismatch("eikonal_residual: mesh mismatch");
    std::vector<double> r = detail::assemble_vector(mesh, [&](index_t t, double* le) {
        Mat2 M = params.conductivity.tensor(mesh.centroids[t]);
        Vec2 gT = element_gradient(mesh, T.values, t);
        double q = (M * gT).dot(gT);
        double nonlin = std::sqrt(params.beta + std::max(0.0, q));
        const auto& tr = mesh.triangles[t];
        double rhs_c = (rhs.values[tr[0]] + rhs.values[tr[1]] + rhs.values[tr[2]]) / 3.0;
        Vec2 Mg = M * gT;
        const auto& g = mesh.basis_gradients[t];
        const double area = mesh.areas[t];
        for (int a = 0; a < 3; ++a)
            le[a] = params.epsilon * area * Mg.dot(g[a]) + area * (nonlin - rhs_c) / 3.0;
    });
    if (neumann) {
        std::vector<double> bn = assemble_outer_neumann_load(mesh, *neumann);
        for (index_t i = 0; i < mesh.vertex_count(); ++i) r[i] -= bn[i];
    }
    for (index_t v = 0; v < mesh.vertex_count(); ++v)
        if (dirichlet.constrained(v)) r[v] = T.values[v] - dirichlet.value_at(v);
    return r;
}

void apply_dirichlet(SparseMatrix& A, std::vector<double>& b, const DirichletMap& dirichlet) {
    const Mesh& mesh = *dirichlet.mesh;
    const index_t nv = A.rows();
    if (nv != mesh.vertex_count() || b.size() != static_cast<std::size_t>(nv))
        throw ContextMismatch("apply_dirichlet: size mismatch");
    const auto& offsets = A.row_offsets();
    const auto& colidx = A.col_indices();
    auto& vals = A.values();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < nv; ++i) {
        if (dirichlet.constrained(i)) {
            for (index_t k = offsets[i]; k < offsets[i + 1]; ++k)
                vals[k] = colidx[k] == i ? 1.0 : 0.0;
            b[i] = dirichlet.value_at(i);
        } else {
            for (index_t k = offsets[i]; k < offsets[i + 1]; ++k) {
                index_t j = colidx[k];
                if (dirichlet.constrained(j)) {
                    b[i] -= vals[k] * dirichlet.value_at(j);
                    vals[k] = 0.0;
                }
            }
        }
    }
}

double boundary_flux(const NodalField& field, int hole_index, const ResidualContext& context) {
    if (context.mesh != field.mesh)
        throw ContextMismatch("boundary_flux: context mesh differs from field mesh");
    const Mesh& mesh = *field.mesh;
    if (hole_index < 0 || hole_index >= mesh.hole_count())
        throw std::out_of_range("boundary_flux: hole index");
    std::vector<double> Ax = context.matrix->apply(field.values);
    double s = 0.0;
    for (index_t v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.vertex_tag[v] == hole_index) s += Ax[v] - (*context.load)[v];
    }
    return -s;
}

std::vector<double> outer_boundary_restrict(const NodalField& field) {
    const Mesh& mesh = *field.mesh;
    std::vector<double> out(mesh.outer_vertices.size());
    for (std::size_t k = 0; k < mesh.outer_vertices.size(); ++k)
        out[k] = field.values[mesh.outer_vertices[k]];
    return out;
}

double outer_boundary_inner(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = mesh.outer_vertices.size();
    if (a.size() != n || b.size() != n)
        throw ContextMismatch("outer_boundary_inner: trace length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t k2 = (k + 1) % n;
        double len = k2 == 0 ? 4.0 - mesh.outer_arclength[k] : mesh.outer_arclength[k2] - mesh.outer_arclength[k];
        double am = 0.5 * (a[k] + a[k2]);
        double bm = 0.5 * (b[k] + b[k2]);
        s += len / 6.0 * (a[k] * b[k] + 4.0 * am * bm + a[k2] * b[k2]);
    }
    return s;
}

double outer_boundary_l2(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
    return std::sqrt(std::max(0.0, outer_boundary_inner(mesh, d, d)));
}

std::vector<double> outer_boundary_load(const Mesh& mesh, const std::vector<double>& h) {
    const std::size_t n = mesh.outer_vertices.size();
    if (h.size() != n)
        throw ContextMismatch("outer_boundary_load: trace length mismatch");
    std::vector<double> out(mesh.vertex_count(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t k2 = (k + 1) % n;
        double len = k2 == 0 ? 4.0 - mesh.outer_arclength[k] : mesh.outer_arclength[k2] - mesh.outer_arclength[k];
        out[mesh.outer_vertices[k]] += len / 6.0 * (2.0 * h[k] + h[k2]);
        out[mesh.outer_vertices[k2]] += len / 6.0 * (h[k] + 2.0 * h[k2]);
    }
    return out;
}

std::vector<double> assemble_volume_load(const Mesh& mesh, const NodalField& rhs) {
    return detail::assemble_vector(mesh, [&](index_t t, double* le) {
        const auto& tr = mesh.triangles[t];
        double rhs_c = (rhs.values[tr[0]] + rhs.values[tr[1]] + rhs.values[tr[2]]) / 3.0;
        double w = mesh.areas[t] * rhs_c / 3.0;
        le[0] = le[1] = le[2] = w;
    });
}

std::vector<double> assemble_outer_neumann_load(const Mesh& mesh, const OuterNeumann& g) {
    std::vector<double> out(mesh.vertex_count(), 0.0);
    // 2-point Gauss on each OUTER edge; outward normal from the square.
    const double q = 1.0 / std::sqrt(3.0);
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        if (e.tag != kOuterTag) continue;
        Vec2 pa = mesh.vertices[e.a], pb = mesh.vertices[e.b];
        Vec2 tangent = pb - pa;
        double len = tangent.norm();
        Vec2 n{tangent.y / len, -tangent.x / len};
        // orient outward: away from the square's interior
        Vec2 mid = (pa + pb) * 0.5;
        if ((mid + n * 1e-6).x > 0.0 && (mid + n * 1e-6).x < 1.0 && (mid + n * 1e-6).y > 0.0 &&
            (mid + n * 1e-6).y < 1.0)
            n = n * -1.0;
        for (double xi : {-q, q}) {
            double s = 0.5 * (1.0 + xi); // in [0,1]
            Vec2 p = pa + tangent * s;
            double w = 0.5 * len * g(p, n);
            out[e.a] += w * (1.0 - s);
            out[e.b] += w * s;
        }
    }
    return out;
}

Vec2 element_gradient(const Mesh& mesh, const std::vector<double>& values, index_t t) {
    const auto& tr = mesh.triangles[t];
    const auto& g = mesh.basis_gradients[t];
    Vec2 out{0.0, 0.0};
    for (int k = 0; k < 3; ++k) out += g[k] * values[tr[k]];
    return out;
}

double l2_norm(const Mesh& mesh, const std::vector<double>& v) {
    // exact P1 mass: int (sum v_k phi_k)^2 = area/6 * (sum v_i v_j (1 + delta_ij)) / 2
    double s = 0.0;
    for (index_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        double a = v[tr[0]], b = v[tr[1]], c = v[tr[2]];
        s += mesh.areas[t] / 6.0 * (a * a + b * b + c * c + a * b + b * c + a * c);
    }
    return std::sqrt(std::max(0.0, s));
}

double h1_norm(const Mesh& mesh, const std::vector<double>& v) {
    double s = 0.0;
    for (index_t t = 0; t < mesh.triangle_count(); ++t) {
        Vec2 g = element_gradient(mesh, v, t);
        s += mesh.areas[t] * g.norm2();
    }
    double l2 = l2_norm(mesh, v);
    return std::sqrt(s + l2 * l2);
}

} // namespace eikorec
