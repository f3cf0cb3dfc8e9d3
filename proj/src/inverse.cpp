#include "eikorec/inverse.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace eikorec {

bool AdmissibleSet::contains(const std::vector<double>& u) const {
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] < lower[i] || u[i] > upper[i]) return false;
    return true;
}

std::vector<double> project(const std::vector<double>& u, const AdmissibleSet& admissible) {
    if (u.size() != admissible.lower.size() || u.size() != admissible.upper.size())
        throw std::invalid_argument("project: dimension mismatch");
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = std::clamp(u[i], admissible.lower[i], admissible.upper[i]);
    return out;
}

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::Discrepancy: return "discrepancy";
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::Stagnation: return "stagnation";
        case StopReason::Aborted: return "aborted";
    }
    return "unknown";
}

double SmallMatrix::max_abs_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
}

double SmallMatrix::max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double SmallMatrix::min_eigenvalue_sym() const {
    Eigen::MatrixXd S(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) S(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    return es.eigenvalues().minCoeff();
}

std::vector<double> solve_small(const SmallMatrix& A, const std::vector<double>& b) {
    Eigen::MatrixXd M(A.n, A.n);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) M(i, j) = A(i, j);
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), A.n);
    Eigen::VectorXd x = M.partialPivLu().solve(bv);
    return std::vector<double>(x.data(), x.data() + A.n);
}

double cost(const StateSolution& state, const std::vector<double>& z_outer) {
    std::vector<double> trace = outer_boundary_restrict(state.T);
    double r = outer_boundary_l2(*state.T.mesh, trace, z_outer);
    return 0.5 * r * r;
}

std::vector<double> gradient_at(const StateSolution& state, const LinearizedSystem& linsys,
                                const std::vector<double>& z_outer) {
    const Mesh& mesh = *state.T.mesh;
    std::vector<double> trace = outer_boundary_restrict(state.T);
    std::vector<double> h(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) h[k] = trace[k] - z_outer[k];
    AdjointSolution adj = linsys.solve_adjoint(h);
    std::vector<double> g(mesh.hole_count());
    for (int i = 0; i < mesh.hole_count(); ++i) g[i] = linsys.adjoint_flux(adj, i);
    return g;
}

std::vector<double> gradient(const Mesh& mesh, const PhysicsParams& params,
                             const std::vector<double>& u, const std::vector<double>& z_outer,
                             const SolverOptions& solver) {
    DirichletMap d = DirichletMap::constants(mesh, u);
    StateSolution state = solve_state(mesh, params, d, NodalField(mesh, 1.0), solver);
    LinearizedSystem linsys(state);
    return gradient_at(state, linsys, z_outer);
}

SmallMatrix gauss_newton_matrix_at(const LinearizedSystem& linsys) {
    const Mesh& mesh = linsys.mesh();
    const int n = mesh.hole_count();
    SmallMatrix H(n);
    for (int j = 0; j < n; ++j) {
        std::vector<double> ej(n, 0.0);
        ej[j] = 1.0;
        NodalField dT = linsys.solve_linearized(ej);
        AdjointSolution w = linsys.solve_adjoint(outer_boundary_restrict(dT));
        for (int i = 0; i < n; ++i) H(i, j) = linsys.adjoint_flux(w, i);
    }
    return H;
}

SmallMatrix gauss_newton_matrix(const Mesh& mesh, const PhysicsParams& params,
                                const std::vector<double>& u, const SolverOptions& solver) {
    DirichletMap d = DirichletMap::constants(mesh, u);
    StateSolution state = solve_state(mesh, params, d, NodalField(mesh, 1.0), solver);
    LinearizedSystem linsys(state);
    return gauss_newton_matrix_at(linsys);
}

InverseReport run_levenberg_marquardt(const Mesh& mesh, const PhysicsParams& params,
                                      const AdmissibleSet& admissible, std::vector<double> u0,
                                      const std::vector<double>& z_outer, double noise_level,
                                      double eta_norm, const LMOptions& options,
                                      const std::vector<double>* u_reference) {
    const int n = mesh.hole_count();
    if (static_cast<int>(u0.size()) != n)
        throw std::invalid_argument("run_levenberg_marquardt: u0 size mismatch");
    if (!admissible.contains(u0))
        throw std::invalid_argument("run_levenberg_marquardt: u0 infeasible");

    InverseReport report;
    report.mode = options.discrepancy_mode;
    report.threshold = options.discrepancy_mode == DiscrepancyMode::LiteralTauDelta
                           ? options.tau * noise_level
                           : options.tau * eta_norm;

    std::vector<double> u = std::move(u0);
    double alpha = options.alpha0;
    auto finalize = [&](StopReason reason, int k) {
        report.reason = reason;
        report.stopping_index = k;
        report.final_u = u;
        if (u_reference) {
            double e = 0.0;
            for (int i = 0; i < n; ++i) e += (u[i] - (*u_reference)[i]) * (u[i] - (*u_reference)[i]);
            report.final_u_error = std::sqrt(e);
        }
        return report;
    };

    NodalField rhs(mesh, 1.0);
    for (int k = 0; k <= options.max_iterations; ++k) {
        StateSolution state;
        try {
            state = solve_state(mesh, params, DirichletMap::constants(mesh, u), rhs, options.solver);
        } catch (const NewtonDiverged& e) {
            report.message = e.what();
            return finalize(StopReason::Aborted, k);
        }
        std::vector<double> trace = outer_boundary_restrict(state.T);
        double res = outer_boundary_l2(mesh, trace, z_outer);

        InverseIterate it;
        it.u = u;
        it.residual_norm = res;
        it.alpha = alpha;
        it.cost = 0.5 * res * res;

        if (res <= report.threshold) {
            report.iterates.push_back(it);
            return finalize(StopReason::Discrepancy, k);
        }
        if (k == options.max_iterations) {
            report.iterates.push_back(it);
            return finalize(StopReason::MaxIterations, k);
        }

        LinearizedSystem linsys(state);
        std::vector<double> g = gradient_at(state, linsys, z_outer);
        SmallMatrix H = gauss_newton_matrix_at(linsys);
        it.min_eig_gn = H.min_eigenvalue_sym();
        report.iterates.push_back(it);

        std::vector<double> u_next;
        for (int attempt = 0;; ++attempt) {
            SmallMatrix Ha = H;
            for (int i = 0; i < n; ++i) Ha(i, i) += alpha;
            std::vector<double> rhs_d(n);
            for (int i = 0; i < n; ++i) rhs_d[i] = -g[i];
            std::vector<double> d = solve_small(Ha, rhs_d);
            std::vector<double> trial(n);
            for (int i = 0; i < n; ++i) trial[i] = u[i] + options.lambda * d[i];
            trial = project(trial, admissible);
            if (!options.safeguarded || attempt >= 10) {
                u_next = trial;
                break;
            }
            StateSolution s;
            try {
                s = solve_state(mesh, params, DirichletMap::constants(mesh, trial), rhs, options.solver);
            } catch (const NewtonDiverged&) {
                alpha *= 10.0;
                continue;
            }
            double res_trial = outer_boundary_l2(mesh, outer_boundary_restrict(s.T), z_outer);
            if (res_trial <= res) {
                u_next = trial;
                break;
            }
            alpha *= 10.0;
        }

        double step = 0.0;
        for (int i = 0; i < n; ++i) step += (u_next[i] - u[i]) * (u_next[i] - u[i]);
        if (std::sqrt(step) <= 1e-14) {
            u = u_next;
            return finalize(StopReason::Stagnation, k);
        }
        u = u_next;
        alpha *= options.q;
    }
    return finalize(StopReason::MaxIterations, options.max_iterations);
}

} // namespace eikorec
