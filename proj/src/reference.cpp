#include "eikorec/reference.hpp"

#include <algorithm>
#include <cmath>

namespace eikorec::ref {

namespace {

// Serial pattern build (same result as build_pattern).
SparseMatrix pattern(const Mesh& mesh) {
    const index_t nv = mesh.vertex_count();
    std::vector<index_t> offsets(nv + 1, 0);
    std::vector<std::vector<index_t>> cols(nv);
    for (index_t i = 0; i < nv; ++i) {
        std::vector<index_t>& c = cols[i];
        c.push_back(i);
        for (index_t t : mesh.vertex_triangles[i])
            for (index_t v : mesh.triangles[t]) c.push_back(v);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        offsets[i + 1] = offsets[i] + static_cast<index_t>(c.size());
    }
    std::vector<index_t> col_indices(offsets[nv]);
    std::vector<double> values(offsets[nv], 0.0);
    for (index_t i = 0; i < nv; ++i)
        std::copy(cols[i].begin(), cols[i].end(), col_indices.begin() + offsets[i]);
    return SparseMatrix(nv, nv, std::move(offsets), std::move(col_indices), std::move(values));
}

void scatter(SparseMatrix& A, const Mesh& mesh, index_t t, const double* le) {
    const auto& tr = mesh.triangles[t];
    const auto& offsets = A.row_offsets();
    const auto& colidx = A.col_indices();
    auto& vals = A.values();
    for (int a = 0; a < 3; ++a) {
        index_t i = tr[a];
        for (int b = 0; b < 3; ++b) {
            auto first = colidx.begin() + offsets[i];
            auto last = colidx.begin() + offsets[i + 1];
            auto it = std::lower_bound(first, last, tr[b]);
            vals[it - colidx.begin()] += le[a * 3 + b];
        }
    }
}

} // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const PhysicsParams& params) {
    params.validate();
    SparseMatrix A = pattern(mesh);
    for (index_t t = 0; t < mesh.triangle_count(); ++t) {
        Mat2 M = params.conductivity.tensor(mesh.centroids[t]);
        const auto& g = mesh.basis_gradients[t];
        const double w = params.epsilon * mesh.areas[t];
        double le[9];
        for (int a = 0; a < 3; ++a) {
            Vec2 Mg = M * g[a];
            for (int b = 0; b < 3; ++b) le[a * 3 + b] = w * Mg.dot(g[b]);
        }
        scatter(A, mesh, t, le);
    }
    return A;
}

SparseMatrix assemble_linearized_operator(const NodalField& T, const PhysicsParams& params) {
    params.validate();
    const Mesh& mesh = *T.mesh;
    SparseMatrix A = pattern(mesh);
    for (index_t t = 0; t < mesh.triangle_count(); ++t) {
        Mat2 M = params.conductivity.tensor(mesh.centroids[t]);
        const auto& g = mesh.basis_gradients[t];
        const double w = params.epsilon * mesh.areas[t];
        double le[9];
        for (int a = 0; a < 3; ++a) {
            Vec2 Mg = M * g[a];
            for (int b = 0; b < 3; ++b) le[a * 3 + b] = w * Mg.dot(g[b]);
        }
        Vec2 gT = element_gradient(mesh, T.values, t);
        double q = (M * gT).dot(gT);
        double norm_m = std::sqrt(std::max(0.0, q));
        Vec2 B{0.0, 0.0};
        if (!(params.beta == 0.0 && norm_m <= 1e-14)) B = (M * gT) / std::sqrt(params.beta + q);
        const double wc = mesh.areas[t] / 3.0;
        for (int b = 0; b < 3; ++b) {
            double col = wc * B.dot(g[b]);
            for (int a = 0; a < 3; ++a) le[a * 3 + b] += col;
        }
        scatter(A, mesh, t, le);
    }
    return A;
}

std::vector<double> eikonal_residual(const NodalField& T, const PhysicsParams& params,
                                     const DirichletMap& dirichlet, const NodalField& rhs) {
    params.validate();
    const Mesh& mesh = *T.mesh;
    std::vector<double> r(mesh.vertex_count(), 0.0);
    for (index_t t = 0; t < mesh.triangle_count(); ++t) {
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
            r[tr[a]] += params.epsilon * area * Mg.dot(g[a]) + area * (nonlin - rhs_c) / 3.0;
    }
    for (index_t v = 0; v < mesh.vertex_count(); ++v)
        if (dirichlet.constrained(v)) r[v] = T.values[v] - dirichlet.value_at(v);
    return r;
}

} // namespace eikorec::ref
