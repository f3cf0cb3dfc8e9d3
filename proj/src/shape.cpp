#include "eikorec/shape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace eikorec {

ShapeSources assemble_shape_sources(const StateSolution& state, const NodalField& phi,
                                    const PhysicsParams& params, double gradient_guard) {
    const Mesh& mesh = *state.T.mesh;
    if (phi.mesh != &mesh) throw ContextMismatch("assemble_shape_sources: mesh mismatch");
    const double eps = params.epsilon;

    ShapeSources s;
    s.mesh = &mesh;
    s.S1.resize(mesh.triangle_count());
    s.S0.resize(mesh.triangle_count());
#pragma omp parallel for schedule(static)
    for (index_t t = 0; t < mesh.triangle_count(); ++t) {
        Vec2 gT = element_gradient(mesh, state.T.values, t);
        // The volume sources take the Lagrange multiplier of the state
        // constraint, which is the negative of the misfit adjoint phi
        // (central finite differences of J pin this sign).
        Vec2 gP = element_gradient(mesh, phi.values, t) * -1.0;
        const auto& tr = mesh.triangles[t];
        double phi_c = -(phi.values[tr[0]] + phi.values[tr[1]] + phi.values[tr[2]]) / 3.0;
        double rhs_c = (state.rhs.values[tr[0]] + state.rhs.values[tr[1]] + state.rhs.values[tr[2]]) / 3.0;
        Mat2 M = params.conductivity.tensor(mesh.centroids[t]);
        auto DM = params.conductivity.tensor_derivative(mesh.centroids[t]);
        Vec2 MgT = M * gT;
        Vec2 MgP = M * gP;
        double q = MgT.dot(gT);
        double guard = params.beta == 0.0 ? gradient_guard : 0.0;
        double nrm = std::sqrt(params.beta + guard + std::max(0.0, q));

        double lagrangian = eps * MgT.dot(gP) + (nrm - rhs_c) * phi_c;
        Mat2 S1 = Mat2::identity() * lagrangian
                  - (Mat2::outer(gT, MgP) + Mat2::outer(gP, MgT)) * eps
                  - Mat2::outer(gT, MgT) * (phi_c / nrm);
        // (M*_v g)_b = g . (dM/dx_b v)
        Vec2 dMgT_x = DM[0] * gT;
        Vec2 dMgT_y = DM[1] * gT;
        Vec2 S0 = Vec2{gP.dot(dMgT_x), gP.dot(dMgT_y)} * eps
                  + Vec2{gT.dot(dMgT_x), gT.dot(dMgT_y)} * (phi_c / (2.0 * nrm));
        s.S1[t] = S1;
        s.S0[t] = S0;
    }
    return s;
}

namespace {

void eliminate_outer(SparseMatrix& A, std::vector<double>& b, const Mesh& mesh) {
    const auto& offsets = A.row_offsets();
    const auto& colidx = A.col_indices();
    auto& vals = A.values();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < mesh.vertex_count(); ++i) {
        if (mesh.vertex_tag[i] == kOuterTag) {
            for (index_t k = offsets[i]; k < offsets[i + 1]; ++k)
                vals[k] = colidx[k] == i ? 1.0 : 0.0;
            b[i] = 0.0;
        } else {
            for (index_t k = offsets[i]; k < offsets[i + 1]; ++k)
                if (mesh.vertex_tag[colidx[k]] == kOuterTag) vals[k] = 0.0;
        }
    }
}

} // namespace

VectorField solve_descent_field(const Mesh& full_mesh, const ShapeSources& sources,
                                const std::vector<index_t>& vertex_map, const ShapeOptions& options) {
    if (full_mesh.domain_kind != DomainKind::FULL)
        throw ContextMismatch("solve_descent_field: FULL mesh required");
    const Mesh& sub = *sources.mesh;
    if (vertex_map.size() != static_cast<std::size_t>(sub.vertex_count()))
        throw ContextMismatch("solve_descent_field: vertex map size mismatch");

    // gamma * int Dh : Dv + int h . v decouples into two scalar solves.
    PhysicsParams identity_gamma;
    identity_gamma.epsilon = options.gamma;
    identity_gamma.beta = 0.0;
    identity_gamma.conductivity = ConductivityModel::identity();
    SparseMatrix A = assemble_stiffness(full_mesh, identity_gamma);
    {
        SparseMatrix Mmat = assemble_mass(full_mesh);
        auto& av = A.values();
        const auto& mv = Mmat.values();
        for (std::size_t k = 0; k < av.size(); ++k) av[k] += mv[k];
    }

    // Load: -(int_Omega S1 : Dv + S0 . v), assembled on the submesh and
    // pushed to FULL vertex numbering.
    std::vector<double> bx(full_mesh.vertex_count(), 0.0);
    std::vector<double> by(full_mesh.vertex_count(), 0.0);
    for (index_t t = 0; t < sub.triangle_count(); ++t) {
        const auto& tr = sub.triangles[t];
        const auto& g = sub.basis_gradients[t];
        const double area = sub.areas[t];
        const Mat2& S1 = sources.S1[t];
        const Vec2& S0 = sources.S0[t];
        for (int a = 0; a < 3; ++a) {
            index_t vi = vertex_map[tr[a]];
            bx[vi] -= area * (S1.a11 * g[a].x + S1.a12 * g[a].y) + area * S0.x / 3.0;
            by[vi] -= area * (S1.a21 * g[a].x + S1.a22 * g[a].y) + area * S0.y / 3.0;
        }
    }

    eliminate_outer(A, bx, full_mesh);
    // by shares the eliminated matrix; only its constrained rows need zeroing
    for (index_t i = 0; i < full_mesh.vertex_count(); ++i)
        if (full_mesh.vertex_tag[i] == kOuterTag) by[i] = 0.0;

    CgOptions cg;
    cg.tol = options.cg_tol;
    cg.maxit = 20000;
    VectorField h;
    h.mesh = &full_mesh;
    h.x = solve_cg(A, bx, cg);
    h.y = solve_cg(A, by, cg);
    return h;
}

double shape_derivative_value(const ShapeSources& sources, const VectorField& h,
                              const std::vector<index_t>& vertex_map) {
    const Mesh& sub = *sources.mesh;
    double s = 0.0;
    for (index_t t = 0; t < sub.triangle_count(); ++t) {
        const auto& tr = sub.triangles[t];
        const auto& g = sub.basis_gradients[t];
        Mat2 Dh{};
        Vec2 hc{0.0, 0.0};
        for (int a = 0; a < 3; ++a) {
            index_t vi = vertex_map[tr[a]];
            Dh.a11 += h.x[vi] * g[a].x;
            Dh.a12 += h.x[vi] * g[a].y;
            Dh.a21 += h.y[vi] * g[a].x;
            Dh.a22 += h.y[vi] * g[a].y;
            hc += Vec2{h.x[vi], h.y[vi]} / 3.0;
        }
        s += sub.areas[t] * (sources.S1[t].ddot(Dh) + sources.S0[t].dot(hc));
    }
    return s;
}

Vec2 average_over_hole(const VectorField& h, int hole_index) {
    const Mesh& mesh = *h.mesh;
    if (mesh.domain_kind != DomainKind::FULL)
        throw ContextMismatch("average_over_hole: FULL mesh required");
    if (hole_index < 0 || hole_index >= mesh.hole_count())
        throw std::out_of_range("average_over_hole: hole index");
    double area = 0.0;
    Vec2 acc{0.0, 0.0};
    for (index_t t = 0; t < mesh.triangle_count(); ++t) {
        if (mesh.triangle_region[t] != hole_index + 1) continue;
        const auto& tr = mesh.triangles[t];
        Vec2 hc{(h.x[tr[0]] + h.x[tr[1]] + h.x[tr[2]]) / 3.0,
                (h.y[tr[0]] + h.y[tr[1]] + h.y[tr[2]]) / 3.0};
        acc += hc * mesh.areas[t];
        area += mesh.areas[t];
    }
    if (area <= 0.0) throw MeshError("average_over_hole: hole not meshed");
    return acc / area;
}

namespace {

struct JointState {
    Mesh full;
    Mesh sub;
    std::vector<index_t> map;
    std::vector<double> z_vec;
    StateSolution state;
    double residual = 0.0;
};

std::vector<HoleSpec> make_holes(const std::vector<Vec2>& X, const std::vector<double>& radii) {
    std::vector<HoleSpec> holes(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) holes[i] = {X[i], radii[i]};
    return holes;
}

std::unique_ptr<JointState> make_joint_state(const JointProblem& p, const std::vector<Vec2>& X,
                                             const std::vector<double>& u) {
    auto js = std::make_unique<JointState>();
    js->full = generate_mesh(make_holes(X, p.radii), p.target_h, DomainKind::FULL);
    SubmeshResult sr = extract_submesh(js->full);
    js->sub = std::move(sr.mesh);
    js->map = std::move(sr.vertex_map);
    js->z_vec.resize(js->sub.outer_vertices.size());
    for (std::size_t k = 0; k < js->z_vec.size(); ++k)
        js->z_vec[k] = p.z_arclength(js->sub.outer_arclength[k]);
    js->state = solve_state(js->sub, p.params, DirichletMap::constants(js->sub, u),
                            NodalField(js->sub, 1.0));
    js->residual = outer_boundary_l2(js->sub, outer_boundary_restrict(js->state.T), js->z_vec);
    return js;
}

Vec2 clamp_to_box(Vec2 x, double radius) {
    double lo = 1.5 * radius;
    return {std::clamp(x.x, lo, 1.0 - lo), std::clamp(x.y, lo, 1.0 - lo)};
}

} // namespace

InverseReport run_joint_reconstruction(const JointProblem& problem, std::vector<double> u0,
                                       std::vector<Vec2> X0, const ShapeOptions& options) {
    const int n = static_cast<int>(problem.radii.size());
    if (static_cast<int>(X0.size()) != n || static_cast<int>(u0.size()) != n)
        throw std::invalid_argument("run_joint_reconstruction: size mismatch");
    validate_holes(make_holes(X0, problem.radii)); // GeometryError before any solve
    if (!problem.admissible.contains(u0))
        throw std::invalid_argument("run_joint_reconstruction: u0 infeasible");

    InverseReport report;
    report.threshold = problem.threshold;

    std::vector<double> u = std::move(u0);
    std::vector<Vec2> X = std::move(X0);

    auto record = [&](const JointState& js, double alpha) {
        InverseIterate it;
        it.u = u;
        it.centers = X;
        it.residual_norm = js.residual;
        it.cost = 0.5 * js.residual * js.residual;
        it.alpha = alpha;
        if (problem.x_reference) {
            it.center_dist.resize(n);
            for (int i = 0; i < n; ++i) it.center_dist[i] = (X[i] - (*problem.x_reference)[i]).norm();
        }
        report.iterates.push_back(it);
    };

    auto finalize = [&](StopReason reason, int k) {
        report.reason = reason;
        report.stopping_index = k;
        report.final_u = u;
        report.final_centers = X;
        if (problem.u_reference) {
            double e = 0.0;
            for (int i = 0; i < n; ++i)
                e += (u[i] - (*problem.u_reference)[i]) * (u[i] - (*problem.u_reference)[i]);
            report.final_u_error = std::sqrt(e);
        }
        return report;
    };

    std::unique_ptr<JointState> js;
    try {
        js = make_joint_state(problem, X, u);
    } catch (const NewtonDiverged& e) {
        report.message = e.what();
        return finalize(StopReason::Aborted, 0);
    }

    for (int k = 0; k <= options.max_iterations; ++k) {
        record(*js, 0.0);
        if (js->residual <= problem.threshold) return finalize(StopReason::Discrepancy, k);
        if (k == options.max_iterations) return finalize(StopReason::MaxIterations, k);

        // Both updates come from the same (T, phi).
        LinearizedSystem linsys(js->state);
        std::vector<double> trace = outer_boundary_restrict(js->state.T);
        std::vector<double> h_data(trace.size());
        for (std::size_t i = 0; i < trace.size(); ++i) h_data[i] = trace[i] - js->z_vec[i];
        AdjointSolution adj = linsys.solve_adjoint(h_data);
        std::vector<double> grad_u(n);
        for (int i = 0; i < n; ++i) grad_u[i] = linsys.adjoint_flux(adj, i);

        ShapeSources sources =
            assemble_shape_sources(js->state, adj.phi, problem.params, options.gradient_guard);
        VectorField hfield = solve_descent_field(js->full, sources, js->map, options);
        std::vector<Vec2> direction(n);
        for (int i = 0; i < n; ++i) direction[i] = average_over_hole(hfield, i);

        const bool move_u = !options.alternating || k % 2 == 0;
        const bool move_x = !options.alternating || k % 2 == 1;
        const double J_now = 0.5 * js->residual * js->residual;
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= options.max_step_halvings && !accepted; ++bt, step *= 0.5) {
            std::vector<double> u_trial = u;
            if (move_u) {
                for (int i = 0; i < n; ++i) u_trial[i] = u[i] - step * grad_u[i];
                u_trial = project(u_trial, problem.admissible);
            }
            std::vector<Vec2> X_trial = X;
            if (move_x)
                for (int i = 0; i < n; ++i)
                    X_trial[i] = clamp_to_box(X[i] + direction[i] * step, problem.radii[i]);
            if (!holes_feasible(make_holes(X_trial, problem.radii))) continue;
            std::unique_ptr<JointState> trial;
            try {
                trial = make_joint_state(problem, X_trial, u_trial);
            } catch (const NewtonDiverged&) {
                continue;
            }
            double J_trial = 0.5 * trial->residual * trial->residual;
            if (J_trial < J_now) {
                u = std::move(u_trial);
                X = std::move(X_trial);
                js = std::move(trial);
                accepted = true;
            }
        }
        if (!accepted) return finalize(StopReason::Stagnation, k);
    }
    return finalize(StopReason::MaxIterations, options.max_iterations);
}

} // namespace eikorec
