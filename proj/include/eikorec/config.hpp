#ifndef EIKOREC_CONFIG_HPP
#define EIKOREC_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "eikorec/shape.hpp"

namespace eikorec {

// Flat key = value configuration with dotted sections; see README for the
// grammar and the full key list. Every field has an explicit default and
// resolved() echoes the complete effective configuration.
struct ExperimentConfig {
    // geometry.*
    std::vector<Vec2> hole_centers = {{0.5, 0.8}, {0.2, 0.2}, {0.8, 0.4}};
    std::vector<double> hole_radii = {0.1, 0.1, 0.1};
    // physics.*
    double epsilon = 0.1;
    double beta = 0.0;
    std::string conductivity = "paper_sine"; // paper_sine | identity | constant
    Mat2 conductivity_matrix = Mat2::identity();
    // truth.*
    std::vector<double> truth_u = {0.0, 0.1, 0.2};
    std::vector<Vec2> truth_centers; // empty -> hole_centers
    // noise.*
    double noise_delta = 0.1;
    std::uint64_t seed = 1;
    // mesh.*
    double mesh_h = 0.02;
    double data_mesh_h = 0.02;
    // solver.*
    double newton_tol = 1e-10;
    int max_newton = 50;
    // lm.*
    double tau = 1.1;
    double alpha0 = 1.0;
    double alpha_q = 0.1;
    double lambda = 1.0;
    int lm_max_iterations = 50;
    std::string discrepancy_mode = "literal_tau_delta"; // | tau_noise_norm
    bool lm_safeguard = false;
    // shape.*
    double gamma = 1.0;
    double gradient_guard = 1e-12;
    int shape_max_iterations = 200;
    bool shape_alternating = false;
    // init.*
    std::vector<double> init_u;      // empty -> zeros
    std::vector<Vec2> init_centers;  // empty -> hole_centers
    // output.*
    std::string output_dir = "out";

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig parse(std::istream& in, const std::string& origin);

    void validate() const;
    std::string resolved() const;

    int hole_count() const { return static_cast<int>(hole_centers.size()); }
    std::vector<HoleSpec> geometry_holes() const;
    std::vector<HoleSpec> truth_holes() const;
    std::vector<Vec2> effective_truth_centers() const;
    std::vector<Vec2> effective_init_centers() const;
    std::vector<double> effective_init_u() const;

    PhysicsParams physics() const;
    SolverOptions solver_options() const;
    LMOptions lm_options() const;
    ShapeOptions shape_options() const;
};

} // namespace eikorec

#endif
