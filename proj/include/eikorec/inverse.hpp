#ifndef EIKOREC_INVERSE_HPP
#define EIKOREC_INVERSE_HPP

#include <limits>
#include <string>

#include "eikorec/eikonal.hpp"

namespace eikorec {

// Box constraints for the activation instants (default u_i >= 0).
struct AdmissibleSet {
    std::vector<double> lower;
    std::vector<double> upper;

    static AdmissibleSet nonnegative(int n) {
        AdmissibleSet s;
        s.lower.assign(n, 0.0);
        s.upper.assign(n, std::numeric_limits<double>::infinity());
        return s;
    }
    bool contains(const std::vector<double>& u) const;
};

std::vector<double> project(const std::vector<double>& u, const AdmissibleSet& admissible);

enum class DiscrepancyMode { LiteralTauDelta, TauNoiseNorm };

struct LMOptions {
    double tau = 1.1;
    double alpha0 = 1.0;
    double q = 0.1; // alpha_k = alpha0 * q^k
    double lambda = 1.0;
    int max_iterations = 50;
    DiscrepancyMode discrepancy_mode = DiscrepancyMode::LiteralTauDelta;
    bool safeguarded = false; // reject steps that increase the residual, alpha *= 10
    SolverOptions solver;
};

enum class StopReason { Discrepancy, MaxIterations, Stagnation, Aborted };

std::string to_string(StopReason r);

struct InverseIterate {
    std::vector<double> u;
    double residual_norm = 0.0;
    double alpha = 0.0;
    double cost = 0.0;
    double min_eig_gn = 0.0;          // min eigenvalue of sym(H) where computed
    std::vector<Vec2> centers;        // joint reconstruction only
    std::vector<double> center_dist;  // d_k^i against the reference positions
};

struct InverseReport {
    std::vector<InverseIterate> iterates;
    int stopping_index = 0; // K_delta when stopped by discrepancy
    StopReason reason = StopReason::MaxIterations;
    double threshold = 0.0;
    DiscrepancyMode mode = DiscrepancyMode::LiteralTauDelta;
    std::vector<double> final_u;
    std::vector<Vec2> final_centers;
    double final_u_error = std::numeric_limits<double>::quiet_NaN();
    std::string message;
};

// Dense n x n helper used for the Gauss-Newton normal matrix.
struct SmallMatrix {
    int n = 0;
    std::vector<double> a; // row-major

    SmallMatrix() = default;
    explicit SmallMatrix(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
    double max_abs_asymmetry() const;
    double max_abs() const;
    double min_eigenvalue_sym() const; // of the symmetrized matrix
};

std::vector<double> solve_small(const SmallMatrix& A, const std::vector<double>& b);

// J(u) = 1/2 || T|_Gamma_N - z ||^2_{L2(Gamma_N)}; z at OUTER vertices in arc order.
double cost(const StateSolution& state, const std::vector<double>& z_outer);

// Gradient via one adjoint solve and consistent hole fluxes.
std::vector<double> gradient(const Mesh& mesh, const PhysicsParams& params,
                             const std::vector<double>& u, const std::vector<double>& z_outer,
                             const SolverOptions& solver = {});

// Same, reusing an existing state/linearization.
std::vector<double> gradient_at(const StateSolution& state, const LinearizedSystem& linsys,
                                const std::vector<double>& z_outer);

// H_ij = flux_i(w_j), w_j adjoint of the trace of the j-th linearized solve.
SmallMatrix gauss_newton_matrix(const Mesh& mesh, const PhysicsParams& params,
                                const std::vector<double>& u, const SolverOptions& solver = {});
SmallMatrix gauss_newton_matrix_at(const LinearizedSystem& linsys);

// Projected Levenberg-Marquardt with the discrepancy stopping rule.
// noise_level is the relative delta of the data; eta_norm the exact
// ||eta||_{L2(Gamma_N)} (used by the TauNoiseNorm mode).
InverseReport run_levenberg_marquardt(const Mesh& mesh, const PhysicsParams& params,
                                      const AdmissibleSet& admissible, std::vector<double> u0,
                                      const std::vector<double>& z_outer, double noise_level,
                                      double eta_norm, const LMOptions& options,
                                      const std::vector<double>* u_reference = nullptr);

} // namespace eikorec

#endif
