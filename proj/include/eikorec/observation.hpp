#ifndef EIKOREC_OBSERVATION_HPP
#define EIKOREC_OBSERVATION_HPP

#include "eikorec/config.hpp"

namespace eikorec {

// Boundary data z as a piecewise-linear, periodic function of arc length
// on the square boundary; survives remeshing without ambiguity.
struct BoundaryObservation {
    std::vector<double> arclength; // strictly increasing in [0, 4)
    std::vector<double> values;
    double delta = 0.0;
    std::uint64_t seed = 0;
    double eta_norm = 0.0; // ||eta||_{L2(Gamma_N)}, exact post-normalization
    std::uint64_t mesh_hash = 0;

    double interpolate(double s) const;
    // z at the OUTER vertices of a mesh, arc-length order.
    std::vector<double> sample(const Mesh& mesh) const;
};

std::uint64_t mesh_fingerprint(const Mesh& mesh);

// Forward solve at the truth configuration on the data mesh plus the
// normalized noise eta = delta ||S|| etahat / ||etahat||, etahat drawn
// i.i.d. standard-normal by vertex index.
BoundaryObservation make_synthetic_data(const ExperimentConfig& config);

void save_observation(const BoundaryObservation& obs, const std::string& path);
BoundaryObservation load_observation(const std::string& path);

} // namespace eikorec

#endif
