#include "eikorec/config.hpp"

#include <fstream>
#include <sstream>

namespace eikorec {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_numbers(const std::string& value, const std::string& key) {
    std::istringstream ss(value);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof())
        throw ConfigError("non-numeric token in value of '" + key + "'");
    return out;
}

std::vector<Vec2> parse_points(const std::string& value, const std::string& key) {
    std::vector<double> nums = parse_numbers(value, key);
    if (nums.size() % 2 != 0)
        throw ConfigError("'" + key + "' needs an even number of coordinates");
    std::vector<Vec2> out(nums.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {nums[2 * i], nums[2 * i + 1]};
    return out;
}

double parse_one(const std::string& value, const std::string& key) {
    std::vector<double> nums = parse_numbers(value, key);
    if (nums.size() != 1) throw ConfigError("'" + key + "' expects a single number");
    return nums[0];
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("'" + key + "' expects true or false");
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open config " + path);
    return parse(in, path);
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& origin) {
    ExperimentConfig c;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "geometry.hole_centers") c.hole_centers = parse_points(value, key);
        else if (key == "geometry.hole_radii") c.hole_radii = parse_numbers(value, key);
        else if (key == "physics.epsilon") c.epsilon = parse_one(value, key);
        else if (key == "physics.beta") c.beta = parse_one(value, key);
        else if (key == "physics.conductivity") c.conductivity = value;
        else if (key == "physics.conductivity_matrix") {
            std::vector<double> m = parse_numbers(value, key);
            if (m.size() != 4) throw ConfigError("'" + key + "' expects 4 numbers");
            c.conductivity_matrix = Mat2{m[0], m[1], m[2], m[3]};
        }
        else if (key == "truth.u") c.truth_u = parse_numbers(value, key);
        else if (key == "truth.centers") c.truth_centers = parse_points(value, key);
        else if (key == "noise.delta") c.noise_delta = parse_one(value, key);
        else if (key == "noise.seed") c.seed = static_cast<std::uint64_t>(parse_one(value, key));
        else if (key == "mesh.h") c.mesh_h = parse_one(value, key);
        else if (key == "mesh.data_h") c.data_mesh_h = parse_one(value, key);
        else if (key == "solver.newton_tol") c.newton_tol = parse_one(value, key);
        else if (key == "solver.max_newton") c.max_newton = static_cast<int>(parse_one(value, key));
        else if (key == "lm.tau") c.tau = parse_one(value, key);
        else if (key == "lm.alpha0") c.alpha0 = parse_one(value, key);
        else if (key == "lm.q") c.alpha_q = parse_one(value, key);
        else if (key == "lm.lambda") c.lambda = parse_one(value, key);
        else if (key == "lm.max_iterations") c.lm_max_iterations = static_cast<int>(parse_one(value, key));
        else if (key == "lm.discrepancy_mode") c.discrepancy_mode = value;
        else if (key == "lm.safeguard") c.lm_safeguard = parse_bool(value, key);
        else if (key == "shape.gamma") c.gamma = parse_one(value, key);
        else if (key == "shape.gradient_guard") c.gradient_guard = parse_one(value, key);
        else if (key == "shape.max_iterations") c.shape_max_iterations = static_cast<int>(parse_one(value, key));
        else if (key == "shape.alternating") c.shape_alternating = parse_bool(value, key);
        else if (key == "init.u") c.init_u = parse_numbers(value, key);
        else if (key == "init.centers") c.init_centers = parse_points(value, key);
        else if (key == "output.dir") c.output_dir = value;
        else throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    const std::size_t n = hole_centers.size();
    if (hole_radii.size() != n)
        throw ConfigError("geometry.hole_radii must match geometry.hole_centers");
    if (truth_u.size() != n) throw ConfigError("truth.u must have one entry per hole");
    if (!truth_centers.empty() && truth_centers.size() != n)
        throw ConfigError("truth.centers must have one point per hole");
    if (!init_centers.empty() && init_centers.size() != n)
        throw ConfigError("init.centers must have one point per hole");
    if (!init_u.empty() && init_u.size() != n)
        throw ConfigError("init.u must have one entry per hole");
    if (!(epsilon > 0.0)) throw ConfigError("physics.epsilon must be positive");
    if (beta < 0.0 || beta > 1.0) throw ConfigError("physics.beta must lie in [0, 1]");
    if (conductivity != "paper_sine" && conductivity != "identity" && conductivity != "constant")
        throw ConfigError("physics.conductivity must be paper_sine, identity or constant");
    if (discrepancy_mode != "literal_tau_delta" && discrepancy_mode != "tau_noise_norm")
        throw ConfigError("lm.discrepancy_mode must be literal_tau_delta or tau_noise_norm");
    if (!(tau > 1.0)) throw ConfigError("lm.tau must exceed 1");
    if (!(lambda > 0.0) || lambda > 1.0) throw ConfigError("lm.lambda must lie in (0, 1]");
    if (!(alpha_q > 0.0) || alpha_q >= 1.0) throw ConfigError("lm.q must lie in (0, 1)");
    if (!(gamma > 0.0)) throw ConfigError("shape.gamma must be positive");
    if (gradient_guard < 0.0) throw ConfigError("shape.gradient_guard must be >= 0");
    if (noise_delta < 0.0) throw ConfigError("noise.delta must be >= 0");
    validate_holes(geometry_holes());
    if (!truth_centers.empty()) validate_holes(truth_holes());
}

std::vector<HoleSpec> ExperimentConfig::geometry_holes() const {
    std::vector<HoleSpec> holes(hole_centers.size());
    for (std::size_t i = 0; i < holes.size(); ++i) holes[i] = {hole_centers[i], hole_radii[i]};
    return holes;
}

std::vector<Vec2> ExperimentConfig::effective_truth_centers() const {
    return truth_centers.empty() ? hole_centers : truth_centers;
}

std::vector<HoleSpec> ExperimentConfig::truth_holes() const {
    std::vector<Vec2> centers = effective_truth_centers();
    std::vector<HoleSpec> holes(centers.size());
    for (std::size_t i = 0; i < holes.size(); ++i) holes[i] = {centers[i], hole_radii[i]};
    return holes;
}

std::vector<Vec2> ExperimentConfig::effective_init_centers() const {
    return init_centers.empty() ? hole_centers : init_centers;
}

std::vector<double> ExperimentConfig::effective_init_u() const {
    return init_u.empty() ? std::vector<double>(hole_centers.size(), 0.0) : init_u;
}

PhysicsParams ExperimentConfig::physics() const {
    PhysicsParams p;
    p.epsilon = epsilon;
    p.beta = beta;
    if (conductivity == "paper_sine") p.conductivity = ConductivityModel::paper_sine();
    else if (conductivity == "identity") p.conductivity = ConductivityModel::identity();
    else p.conductivity = ConductivityModel::constant(conductivity_matrix);
    return p;
}

SolverOptions ExperimentConfig::solver_options() const {
    SolverOptions s;
    s.newton_tol = newton_tol;
    s.max_newton = max_newton;
    return s;
}

LMOptions ExperimentConfig::lm_options() const {
    LMOptions o;
    o.tau = tau;
    o.alpha0 = alpha0;
    o.q = alpha_q;
    o.lambda = lambda;
    o.max_iterations = lm_max_iterations;
    o.discrepancy_mode = discrepancy_mode == "tau_noise_norm" ? DiscrepancyMode::TauNoiseNorm
                                                              : DiscrepancyMode::LiteralTauDelta;
    o.safeguarded = lm_safeguard;
    o.solver = solver_options();
    return o;
}

ShapeOptions ExperimentConfig::shape_options() const {
    ShapeOptions o;
    o.gamma = gamma;
    o.gradient_guard = gradient_guard;
    o.max_iterations = shape_max_iterations;
    o.alternating = shape_alternating;
    o.solver = solver_options();
    return o;
}

namespace {

void put_points(std::ostringstream& out, const char* key, const std::vector<Vec2>& pts) {
    out << key << " =";
    for (Vec2 p : pts) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %.17g %.17g", p.x, p.y);
        out << buf;
    }
    out << "\n";
}

void put_numbers(std::ostringstream& out, const char* key, const std::vector<double>& v) {
    out << key << " =";
    for (double x : v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.17g", x);
        out << buf;
    }
    out << "\n";
}

void put_number(std::ostringstream& out, const char* key, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << " = " << buf << "\n";
}

} // namespace

std::string ExperimentConfig::resolved() const {
    std::ostringstream out;
    put_points(out, "geometry.hole_centers", hole_centers);
    put_numbers(out, "geometry.hole_radii", hole_radii);
    put_number(out, "physics.epsilon", epsilon);
    put_number(out, "physics.beta", beta);
    out << "physics.conductivity = " << conductivity << "\n";
    if (conductivity == "constant")
        put_numbers(out, "physics.conductivity_matrix",
                    {conductivity_matrix.a11, conductivity_matrix.a12, conductivity_matrix.a21,
                     conductivity_matrix.a22});
    put_numbers(out, "truth.u", truth_u);
    put_points(out, "truth.centers", effective_truth_centers());
    put_number(out, "noise.delta", noise_delta);
    out << "noise.seed = " << seed << "\n";
    put_number(out, "mesh.h", mesh_h);
    put_number(out, "mesh.data_h", data_mesh_h);
    put_number(out, "solver.newton_tol", newton_tol);
    out << "solver.max_newton = " << max_newton << "\n";
    put_number(out, "lm.tau", tau);
    put_number(out, "lm.alpha0", alpha0);
    put_number(out, "lm.q", alpha_q);
    put_number(out, "lm.lambda", lambda);
    out << "lm.max_iterations = " << lm_max_iterations << "\n";
    out << "lm.discrepancy_mode = " << discrepancy_mode << "\n";
    out << "lm.safeguard = " << (lm_safeguard ? "true" : "false") << "\n";
    put_number(out, "shape.gamma", gamma);
    put_number(out, "shape.gradient_guard", gradient_guard);
    out << "shape.max_iterations = " << shape_max_iterations << "\n";
    out << "shape.alternating = " << (shape_alternating ? "true" : "false") << "\n";
    put_numbers(out, "init.u", effective_init_u());
    put_points(out, "init.centers", effective_init_centers());
    out << "output.dir = " << output_dir << "\n";
    return out.str();
}

} // namespace eikorec
