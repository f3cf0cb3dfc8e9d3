#ifndef EIKOREC_EIKONAL_HPP
#define EIKOREC_EIKONAL_HPP


#include "eikorec/fem.hpp"

namespace eikorec {

struct SolverOptions {
    double newton_tol = 1e-10; // absolute l2 residual
    int max_newton = 50;
    double backtrack_factor = 0.5;
    double armijo_c = 1e-4;
    int max_backtrack = 30;
    enum class InitialGuess { LinearPoisson, Given } initial_guess = InitialGuess::LinearPoisson;
    std::vector<double> given_guess;
};

struct StateSolution {
    NodalField T;
    int newton_iterations = 0;
    double final_residual_norm = 0.0;
    std::vector<double> residual_history;
    PhysicsParams params;
    DirichletMap dirichlet;
    NodalField rhs;
    OuterNeumann neumann; // empty unless the test-only Neumann path is used
};

// Semismooth (beta = 0) damped Newton for the viscous Eikonal state.
StateSolution solve_state(const Mesh& mesh, const PhysicsParams& params,
                          const DirichletMap& dirichlet, const NodalField& rhs,
                          const SolverOptions& options = {},
                          const OuterNeumann* neumann = nullptr);

struct AdjointSolution {
    NodalField phi;
    std::vector<double> load; // pre-elimination adjoint load
};

// Linearization at a converged state: one factorization shared by the
// linearized solves, the adjoint (transpose) solves and the flux contexts.
class LinearizedSystem {
  public:
    explicit LinearizedSystem(const StateSolution& state);

    // delta_T with Dirichlet values delta_u on the holes and volume load r.
    NodalField solve_linearized(const std::vector<double>& delta_u,
                                const NodalField* r = nullptr) const;

    // phi with homogeneous hole Dirichlet and boundary load int_{Gamma_N} h v ds;
    // exact transpose of the linearized matrix (discrete adjoint).
    AdjointSolution solve_adjoint(const std::vector<double>& h_outer) const;

    // Consistent flux of an adjoint field on hole i (transposed context).
    double adjoint_flux(const AdjointSolution& adj, int hole_index) const;

    const Mesh& mesh() const { return *mesh_; }
    const SparseMatrix& matrix() const { return A_pre_; }
    const SparseMatrix& matrix_transposed() const { return A_pre_T_; }

  private:
    const Mesh* mesh_;
    PhysicsParams params_;
    DirichletMap dirichlet_zero_;
    SparseMatrix A_pre_;
    SparseMatrix A_pre_T_;
    SparseMatrix A_elim_;
    DirectFactorization lu_;
};

// Free-function forms of the spec operations.
NodalField solve_linearized(const StateSolution& state, const std::vector<double>& delta_u,
                            const NodalField* r = nullptr);
NodalField solve_adjoint(const StateSolution& state, const std::vector<double>& h_outer);

struct BetaContinuationEntry {
    double beta = 0.0;
    bool converged = false;
    double h1_distance = 0.0; // to the beta = 0 solution
};

// Solves the state along a decreasing beta list ending at 0, warm-starting
// each solve from the previous one.
std::vector<BetaContinuationEntry> beta_continuation(const Mesh& mesh, const PhysicsParams& base,
                                                     const std::vector<double>& beta_list,
                                                     const DirichletMap& dirichlet,
                                                     const NodalField& rhs,
                                                     const SolverOptions& options = {});

} // namespace eikorec

#endif
