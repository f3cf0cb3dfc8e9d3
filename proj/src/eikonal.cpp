#include "eikorec/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eikorec {

namespace {

// b-side of the Dirichlet elimination against the pre-elimination matrix.
void eliminate_rhs(const SparseMatrix& A_pre, std::vector<double>& b, const DirichletMap& d) {
    const Mesh& mesh = *d.mesh;
    const auto& offsets = A_pre.row_offsets();
    const auto& colidx = A_pre.col_indices();
    const auto& vals = A_pre.values();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < mesh.vertex_count(); ++i) {
        if (d.constrained(i)) {
            b[i] = d.value_at(i);
        } else {
            for (index_t k = offsets[i]; k < offsets[i + 1]; ++k) {
                index_t j = colidx[k];
                if (d.constrained(j)) b[i] -= vals[k] * d.value_at(j);
            }
        }
    }
}

} // namespace

StateSolution solve_state(const Mesh& mesh, const PhysicsParams& params,
                          const DirichletMap& dirichlet, const NodalField& rhs,
                          const SolverOptions& options, const OuterNeumann* neumann) {
    params.validate();
    if (dirichlet.mesh != &mesh || rhs.mesh != &mesh)
        throw ContextMismatch("solve_state: mesh mismatch");

    StateSolution out;
    out.params = params;
    out.dirichlet = dirichlet;
    out.rhs = rhs;
    if (neumann) out.neumann = *neumann;

    NodalField T(mesh);
    if (options.initial_guess == SolverOptions::InitialGuess::Given) {
        if (options.given_guess.size() != static_cast<std::size_t>(mesh.vertex_count()))
            throw std::invalid_argument("solve_state: given initial guess has wrong length");
        T.values = options.given_guess;
        for (index_t v = 0; v < mesh.vertex_count(); ++v)
            if (dirichlet.constrained(v)) T.values[v] = dirichlet.value_at(v);
    } else {
        // Linearization at grad T = 0: -eps div(M grad T) = rhs - sqrt(beta)
        // with the same boundary conditions (equals the plain Poisson guess
        // at beta = 0; exact for constant solutions at beta = 1, rhs = 1).
        SparseMatrix A = assemble_stiffness(mesh, params);
        NodalField shifted = rhs;
        const double root_beta = std::sqrt(params.beta);
        for (double& v : shifted.values) v -= root_beta;
        std::vector<double> b = assemble_volume_load(mesh, shifted);
        if (neumann) {
            std::vector<double> bn = assemble_outer_neumann_load(mesh, *neumann);
            for (index_t i = 0; i < mesh.vertex_count(); ++i) b[i] += bn[i];
        }
        apply_dirichlet(A, b, dirichlet);
        T.values = solve_direct(A, b);
    }

    auto residual_norm = [&](const NodalField& f, std::vector<double>& r) {
        r = eikonal_residual(f, params, dirichlet, rhs, neumann);
        return norm2(r);
    };

    std::vector<double> r;
    double rn = residual_norm(T, r);
    out.residual_history.push_back(rn);

    int it = 0;
    for (; it < options.max_newton && rn > options.newton_tol; ++it) {
        SparseMatrix A = assemble_linearized_operator(T, params);
        std::vector<double> rhs_corr = r;
        for (index_t v = 0; v < mesh.vertex_count(); ++v)
            if (dirichlet.constrained(v)) rhs_corr[v] = 0.0;
        DirichletMap zero = dirichlet;
        zero.nodal_override.assign(mesh.vertex_count(), 0.0);
        apply_dirichlet(A, rhs_corr, zero);
        std::vector<double> delta = solve_direct(A, rhs_corr);

        // Residual-norm backtracking with the Armijo bound; keeps the best
        // trial even when the bound is never met.
        double lambda = 1.0;
        NodalField trial(mesh);
        NodalField best_field(mesh);
        std::vector<double> r_best;
        double best_rn = std::numeric_limits<double>::infinity();
        for (int bt = 0; bt <= options.max_backtrack; ++bt) {
            trial.values = T.values;
            for (index_t v = 0; v < mesh.vertex_count(); ++v)
                trial.values[v] -= lambda * delta[v];
            std::vector<double> r_trial;
            double rn_trial = residual_norm(trial, r_trial);
            if (rn_trial < best_rn) {
                best_rn = rn_trial;
                best_field.values = trial.values;
                r_best = std::move(r_trial);
            }
            if (rn_trial <= (1.0 - options.armijo_c * lambda) * rn) break;
            lambda *= options.backtrack_factor;
        }
        if (best_rn >= rn) {
            // no progress at any step length
            out.residual_history.push_back(best_rn);
            break;
        }
        T.values = best_field.values;
        r = std::move(r_best);
        rn = best_rn;
        out.residual_history.push_back(rn);
    }

    out.T = T;
    out.newton_iterations = it;
    out.final_residual_norm = rn;
    if (rn > options.newton_tol)
        throw NewtonDiverged("Newton did not reach tolerance " + std::to_string(options.newton_tol) +
                                 " (residual " + std::to_string(rn) + ")",
                             T.values, out.residual_history);
    return out;
}

LinearizedSystem::LinearizedSystem(const StateSolution& state)
    : mesh_(state.T.mesh),
      params_(state.params),
      dirichlet_zero_(state.dirichlet),
      A_pre_(assemble_linearized_operator(state.T, state.params)),
      A_pre_T_(A_pre_.transposed()),
      A_elim_([&] {
          SparseMatrix A = A_pre_;
          std::vector<double> b(mesh_->vertex_count(), 0.0);
          DirichletMap zero = state.dirichlet;
          zero.nodal_override.assign(mesh_->vertex_count(), 0.0);
          apply_dirichlet(A, b, zero);
          return A;
      }()),
      lu_(A_elim_) {
    dirichlet_zero_.nodal_override.assign(mesh_->vertex_count(), 0.0);
}

NodalField LinearizedSystem::solve_linearized(const std::vector<double>& delta_u,
                                              const NodalField* r) const {
    if (static_cast<int>(delta_u.size()) != mesh_->hole_count())
        throw std::invalid_argument("solve_linearized: one Dirichlet value per hole required");
    std::vector<double> b(mesh_->vertex_count(), 0.0);
    if (r) {
        if (r->mesh != mesh_) throw ContextMismatch("solve_linearized: load mesh mismatch");
        b = assemble_volume_load(*mesh_, *r);
    }
    DirichletMap d = dirichlet_zero_;
    d.nodal_override.clear();
    d.hole_values = delta_u;
    eliminate_rhs(A_pre_, b, d);
    return NodalField(*mesh_, lu_.solve(b));
}

AdjointSolution LinearizedSystem::solve_adjoint(const std::vector<double>& h_outer) const {
    AdjointSolution out;
    out.load = outer_boundary_load(*mesh_, h_outer);
    // homogeneous hole Dirichlet: load is already zero at hole vertices
    out.phi = NodalField(*mesh_, lu_.solve_transpose(out.load));
    return out;
}

double LinearizedSystem::adjoint_flux(const AdjointSolution& adj, int hole_index) const {
    ResidualContext ctx{&A_pre_T_, &adj.load, mesh_};
    return boundary_flux(adj.phi, hole_index, ctx);
}

NodalField solve_linearized(const StateSolution& state, const std::vector<double>& delta_u,
                            const NodalField* r) {
    return LinearizedSystem(state).solve_linearized(delta_u, r);
}

NodalField solve_adjoint(const StateSolution& state, const std::vector<double>& h_outer) {
    return LinearizedSystem(state).solve_adjoint(h_outer).phi;
}

std::vector<BetaContinuationEntry> beta_continuation(const Mesh& mesh, const PhysicsParams& base,
                                                     const std::vector<double>& beta_list,
                                                     const DirichletMap& dirichlet,
                                                     const NodalField& rhs,
                                                     const SolverOptions& options) {
    if (beta_list.empty() || beta_list.back() != 0.0)
        throw std::invalid_argument("beta_continuation: list must end at beta = 0");
    for (std::size_t k = 1; k < beta_list.size(); ++k)
        if (!(beta_list[k] < beta_list[k - 1]))
            throw std::invalid_argument("beta_continuation: list must be strictly decreasing");

    std::vector<BetaContinuationEntry> entries;
    std::vector<NodalField> solutions;
    SolverOptions opts = options;
    for (double beta : beta_list) {
        PhysicsParams p = base;
        p.beta = beta;
        BetaContinuationEntry e;
        e.beta = beta;
        try {
            StateSolution s = solve_state(mesh, p, dirichlet, rhs, opts);
            e.converged = true;
            solutions.push_back(s.T);
            opts.initial_guess = SolverOptions::InitialGuess::Given;
            opts.given_guess = s.T.values;
        } catch (const NewtonDiverged&) {
            e.converged = false;
            solutions.emplace_back();
        }
        entries.push_back(e);
    }
    if (!entries.back().converged)
        throw NewtonDiverged("beta_continuation: beta = 0 solve diverged", {}, {});
    const NodalField& T0 = solutions.back();
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (!entries[k].converged) continue;
        std::vector<double> diff(mesh.vertex_count());
        for (index_t v = 0; v < mesh.vertex_count(); ++v)
            diff[v] = solutions[k].values[v] - T0.values[v];
        entries[k].h1_distance = h1_norm(mesh, diff);
    }
    return entries;
}

} // namespace eikorec
