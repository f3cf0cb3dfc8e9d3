#include "eikorec/observation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eikorec/prng.hpp"

namespace eikorec {

double BoundaryObservation::interpolate(double s) const {
    const std::size_t n = arclength.size();
    if (n == 0) throw std::logic_error("BoundaryObservation: empty");
    if (n == 1) return values[0];
    s = std::fmod(s, 4.0);
    if (s < 0.0) s += 4.0;
    auto it = std::upper_bound(arclength.begin(), arclength.end(), s);
    std::size_t hi = static_cast<std::size_t>(it - arclength.begin());
    std::size_t lo;
    double s_lo, s_hi;
    if (hi == 0) { // before the first breakpoint: wrap segment
        lo = n - 1;
        s_lo = arclength[lo] - 4.0;
        s_hi = arclength[0];
    } else if (hi == n) { // after the last breakpoint: wrap segment
        lo = n - 1;
        s_lo = arclength[lo];
        s_hi = arclength[0] + 4.0;
        hi = 0;
    } else {
        lo = hi - 1;
        s_lo = arclength[lo];
        s_hi = arclength[hi];
    }
    double len = s_hi - s_lo;
    double w = len > 0.0 ? (s - s_lo) / len : 0.0;
    return (1.0 - w) * values[lo] + w * values[hi];
}

std::vector<double> BoundaryObservation::sample(const Mesh& mesh) const {
    std::vector<double> out(mesh.outer_vertices.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = interpolate(mesh.outer_arclength[k]);
    return out;
}

std::uint64_t mesh_fingerprint(const Mesh& mesh) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    auto mix = [&h](const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const Vec2& v : mesh.vertices) mix(&v, sizeof v);
    for (const auto& t : mesh.triangles) mix(t.data(), sizeof(index_t) * 3);
    return h;
}

BoundaryObservation make_synthetic_data(const ExperimentConfig& config) {
    Mesh mesh = generate_mesh(config.truth_holes(), config.data_mesh_h, DomainKind::HOLED);
    StateSolution state = solve_state(mesh, config.physics(),
                                      DirichletMap::constants(mesh, config.truth_u),
                                      NodalField(mesh, 1.0), config.solver_options());
    std::vector<double> trace = outer_boundary_restrict(state.T);

    BoundaryObservation obs;
    obs.arclength = mesh.outer_arclength;
    obs.delta = config.noise_delta;
    obs.seed = config.seed;
    obs.mesh_hash = mesh_fingerprint(mesh);

    if (config.noise_delta == 0.0) {
        obs.values = trace;
        obs.eta_norm = 0.0;
        return obs;
    }

    std::vector<double> etahat(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k)
        etahat[k] = standard_normal(config.seed, static_cast<std::uint64_t>(mesh.outer_vertices[k]));
    std::vector<double> zero(trace.size(), 0.0);
    double signal = outer_boundary_l2(mesh, trace, zero);
    double etahat_norm = outer_boundary_l2(mesh, etahat, zero);
    if (etahat_norm == 0.0) throw std::logic_error("make_synthetic_data: degenerate noise draw");
    double scale = config.noise_delta * signal / etahat_norm;

    obs.values.resize(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) obs.values[k] = trace[k] + scale * etahat[k];
    obs.eta_norm = config.noise_delta * signal;
    return obs;
}

void save_observation(const BoundaryObservation& obs, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IOError("cannot open " + path + " for writing");
    std::fprintf(f, "eikorec-observation v1\n");
    std::fprintf(f, "%zu %.17g %llu %.17g %llu\n", obs.arclength.size(), obs.delta,
                 static_cast<unsigned long long>(obs.seed), obs.eta_norm,
                 static_cast<unsigned long long>(obs.mesh_hash));
    for (std::size_t k = 0; k < obs.arclength.size(); ++k)
        std::fprintf(f, "%.17g %.17g\n", obs.arclength[k], obs.values[k]);
    if (std::fclose(f) != 0) throw IOError("write to " + path + " failed");
}

BoundaryObservation load_observation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line) || (++lineno, line != "eikorec-observation v1"))
        throw FormatError("expected header 'eikorec-observation v1'", lineno);
    if (!std::getline(in, line)) throw FormatError("missing counts line", ++lineno);
    ++lineno;
    BoundaryObservation obs;
    std::size_t n = 0;
    unsigned long long seed = 0, hash = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> n >> obs.delta >> seed >> obs.eta_norm >> hash))
            throw FormatError("bad counts line", lineno);
    }
    obs.seed = seed;
    obs.mesh_hash = hash;
    obs.arclength.reserve(n);
    obs.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::getline(in, line)) throw FormatError("truncated observation block", ++lineno);
        ++lineno;
        std::istringstream ss(line);
        double s, z;
        if (!(ss >> s >> z)) throw FormatError("bad observation line", lineno);
        if (!obs.arclength.empty() && s <= obs.arclength.back())
            throw FormatError("arc lengths not strictly increasing", lineno);
        if (!std::isfinite(z)) throw FormatError("non-finite observation value", lineno);
        obs.arclength.push_back(s);
        obs.values.push_back(z);
    }
    return obs;
}

} // namespace eikorec
