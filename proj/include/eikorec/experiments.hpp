#ifndef EIKOREC_EXPERIMENTS_HPP
#define EIKOREC_EXPERIMENTS_HPP

#include <iosfwd>

#include "eikorec/observation.hpp"

namespace eikorec {

// Experiment 1: reconstruct the activation instants on fixed geometry.
struct InstantsExperiment {
    InverseReport report;
    BoundaryObservation data;
    bool inverse_crime = false; // data mesh coincides with the forward mesh
};

InstantsExperiment run_experiment_instants(const ExperimentConfig& config,
                                           const std::string& out_dir);

// Experiment 2: joint reconstruction of positions and instants.
struct JointExperimentRow {
    double delta = 0.0;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> center_dist;
    double u_error = 0.0;
    StopReason reason = StopReason::MaxIterations;
};

struct JointExperiment {
    InverseReport report;
    BoundaryObservation data;
    JointExperimentRow row;
};

JointExperiment run_experiment_joint(const ExperimentConfig& config, const std::string& out_dir);

void write_joint_table(const std::vector<JointExperimentRow>& rows, const std::string& path);

// FD validation of the adjoint gradient and of the shape derivative.
struct GradientCheckResult {
    double instant_deviation = 0.0; // max componentwise relative deviation
    double shape_deviation = 0.0;   // relative deviation of DJ(h)
    bool pass = false;
};

GradientCheckResult check_gradient(const ExperimentConfig& config, bool corrupt_flux_sign = false,
                                   std::ostream* log = nullptr);

std::vector<BetaContinuationEntry> run_beta_sweep(const ExperimentConfig& config,
                                                  const std::string& out_dir,
                                                  const std::vector<double>& beta_list = {1.0, 0.1,
                                                                                          0.01,
                                                                                          0.001,
                                                                                          0.0});

// Forward solve at the truth configuration; writes the boundary trace.
void run_forward(const ExperimentConfig& config, const std::string& out_dir);

void ensure_directory(const std::string& dir);

} // namespace eikorec

#endif
