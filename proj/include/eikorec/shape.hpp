#ifndef EIKOREC_SHAPE_HPP
#define EIKOREC_SHAPE_HPP

#include <functional>

#include "eikorec/inverse.hpp"

namespace eikorec {

// Per-element volume sources of the shape derivative
// DJ h = int_Omega S1 : Dh + S0 . h.
struct ShapeSources {
    const Mesh* mesh = nullptr; // HOLED
    std::vector<Mat2> S1;
    std::vector<Vec2> S0;
};

struct ShapeOptions {
    double gamma = 1.0;          // elasticity parameter
    double gradient_guard = 1e-12; // added under |grad T|_M at beta = 0
    int max_step_halvings = 20;  // backtracking from step 1.0
    int max_iterations = 200;
    double cg_tol = 1e-10;
    bool alternating = false; // alternate instant/position updates per iteration
    SolverOptions solver;
};

// Evaluates S1/S0 at element centroids from the state T and the adjoint
// phi (solved with h = S(u)|_Gamma_N - z).
ShapeSources assemble_shape_sources(const StateSolution& state, const NodalField& phi,
                                    const PhysicsParams& params, double gradient_guard = 1e-12);

// P1 vector field on the FULL mesh.
struct VectorField {
    const Mesh* mesh = nullptr;
    std::vector<double> x;
    std::vector<double> y;
};

// Solves int_U gamma Dh : Dv + h . v = -int_Omega S1 : Dv + S0 . v for all
// v in H^1_0(U)^2 (zero Dirichlet on the square boundary; CG, SPD).
VectorField solve_descent_field(const Mesh& full_mesh, const ShapeSources& sources,
                                const std::vector<index_t>& vertex_map, const ShapeOptions& options);

// DJ h for a field on the FULL mesh, evaluated over Omega with the same
// quadrature the descent-field load uses.
double shape_derivative_value(const ShapeSources& sources, const VectorField& h,
                              const std::vector<index_t>& vertex_map);

// Area-weighted mean of h over the triangles inside hole i.
Vec2 average_over_hole(const VectorField& h, int hole_index);

// Joint position + instant reconstruction (remesh every iteration).
struct JointProblem {
    std::vector<double> radii; // fixed hole radii
    PhysicsParams params;
    double target_h = 0.02;
    AdmissibleSet admissible;
    std::function<double(double)> z_arclength; // data on the square boundary
    double threshold = 0.0;                    // discrepancy threshold
    const std::vector<Vec2>* x_reference = nullptr;
    const std::vector<double>* u_reference = nullptr;
};

InverseReport run_joint_reconstruction(const JointProblem& problem, std::vector<double> u0,
                                       std::vector<Vec2> X0, const ShapeOptions& options);

} // namespace eikorec

#endif
