#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "eikorec/experiments.hpp"
#include "eikorec/prng.hpp"

using namespace eikorec;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig coarse_config() {
    ExperimentConfig c;
    c.mesh_h = 0.06;
    c.data_mesh_h = 0.055;
    c.noise_delta = 0.1;
    c.seed = 3;
    return c;
}

} // namespace

TEST_SUITE("app") {

TEST_CASE("prng reproduces its frozen reference draws") {
    CHECK(uniform01(1, 0) == doctest::Approx(0.5665615751722809).epsilon(1e-16));
    CHECK(uniform01(1, 1) == doctest::Approx(0.74578175726270113).epsilon(1e-16));
    CHECK(uniform01(42, 7) == doctest::Approx(0.80063187671350333).epsilon(1e-16));
    CHECK(standard_normal(1, 0) == doctest::Approx(-0.034267321791851144).epsilon(1e-16));
    CHECK(standard_normal(1, 1) == doctest::Approx(-2.5000674933698677).epsilon(1e-16));
    CHECK(standard_normal(42, 7) == doctest::Approx(0.42664665906935234).epsilon(1e-16));
    // pure function of (seed, counter)
    CHECK(standard_normal(9, 5) == standard_normal(9, 5));
}

TEST_CASE("noise normalization is exact") {
    ExperimentConfig cfg = coarse_config();
    for (double delta : {0.1, 0.01, 1e-9}) {
        cfg.noise_delta = delta;
        BoundaryObservation obs = make_synthetic_data(cfg);
        Mesh data_mesh = generate_mesh(cfg.truth_holes(), cfg.data_mesh_h, DomainKind::HOLED);
        StateSolution s = solve_state(data_mesh, cfg.physics(),
                                      DirichletMap::constants(data_mesh, cfg.truth_u),
                                      NodalField(data_mesh, 1.0), cfg.solver_options());
        std::vector<double> trace = outer_boundary_restrict(s.T);
        double num = outer_boundary_l2(data_mesh, obs.values, trace);
        std::vector<double> zero(trace.size(), 0.0);
        double den = outer_boundary_l2(data_mesh, trace, zero);
        CHECK(std::abs(num / den - delta) <= 1e-12);
        CHECK(obs.eta_norm == doctest::Approx(delta * den).epsilon(1e-14));
    }
}

TEST_CASE("delta = 0 returns the exact trace") {
    ExperimentConfig cfg = coarse_config();
    cfg.noise_delta = 0.0;
    BoundaryObservation obs = make_synthetic_data(cfg);
    Mesh data_mesh = generate_mesh(cfg.truth_holes(), cfg.data_mesh_h, DomainKind::HOLED);
    StateSolution s = solve_state(data_mesh, cfg.physics(),
                                  DirichletMap::constants(data_mesh, cfg.truth_u),
                                  NodalField(data_mesh, 1.0), cfg.solver_options());
    std::vector<double> trace = outer_boundary_restrict(s.T);
    REQUIRE(obs.values.size() == trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) CHECK(obs.values[k] == trace[k]);
    CHECK(obs.eta_norm == 0.0);
}

TEST_CASE("same seed gives bit-identical data, different seed differs") {
    ExperimentConfig cfg = coarse_config();
    BoundaryObservation a = make_synthetic_data(cfg);
    BoundaryObservation b = make_synthetic_data(cfg);
    CHECK(a.values == b.values);
    cfg.seed = 4;
    BoundaryObservation c = make_synthetic_data(cfg);
    CHECK(a.values != c.values);
}

TEST_CASE("observation file round trip") {
    ExperimentConfig cfg = coarse_config();
    BoundaryObservation obs = make_synthetic_data(cfg);
    save_observation(obs, "/tmp/eikorec_obs.txt");
    BoundaryObservation r = load_observation("/tmp/eikorec_obs.txt");
    CHECK(r.arclength == obs.arclength);
    CHECK(r.values == obs.values);
    CHECK(r.delta == obs.delta);
    CHECK(r.seed == obs.seed);
    CHECK(r.eta_norm == obs.eta_norm);
    CHECK(r.mesh_hash == obs.mesh_hash);
}

TEST_CASE("observation interpolation is exact at breakpoints and periodic") {
    BoundaryObservation obs;
    obs.arclength = {0.0, 1.0, 2.0, 3.0};
    obs.values = {1.0, 2.0, 3.0, 4.0};
    CHECK(obs.interpolate(1.0) == 2.0);
    CHECK(obs.interpolate(1.5) == doctest::Approx(2.5));
    CHECK(obs.interpolate(3.5) == doctest::Approx(2.5)); // wraps toward s=4 -> value 1
    CHECK(obs.interpolate(4.0) == 1.0);
    CHECK(obs.interpolate(-0.5) == doctest::Approx(2.5));
}

TEST_CASE("config parses, validates and echoes every key") {
    std::istringstream in(
        "# comment\n"
        "geometry.hole_centers = 0.5 0.8  0.2 0.2  0.8 0.4\n"
        "geometry.hole_radii = 0.1 0.1 0.1\n"
        "physics.epsilon = 0.1\n"
        "physics.beta = 0\n"
        "truth.u = 0 0.1 0.2\n"
        "noise.delta = 0.01\n"
        "noise.seed = 11\n"
        "mesh.h = 0.05\n"
        "mesh.data_h = 0.04\n"
        "lm.tau = 1.2\n");
    ExperimentConfig c = ExperimentConfig::parse(in, "inline");
    CHECK(c.noise_delta == 0.01);
    CHECK(c.seed == 11);
    CHECK(c.tau == 1.2);
    std::string echo = c.resolved();
    // resolved output parses back to the same configuration
    std::istringstream echo_in(echo);
    ExperimentConfig c2 = ExperimentConfig::parse(echo_in, "echo");
    CHECK(c2.resolved() == echo);
    CHECK(echo.find("lm.lambda = 1") != std::string::npos);
    CHECK(echo.find("init.u = 0 0 0") != std::string::npos);
}

TEST_CASE("config errors") {
    std::istringstream bad_key("geometry.holes = 3\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(bad_key, "inline"), ConfigError);
    std::istringstream bad_line("physics.epsilon 0.1\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(bad_line, "inline"), ConfigError);
    std::istringstream missing_truth("truth.u =\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(missing_truth, "inline"), ConfigError);
    std::istringstream bad_tau("lm.tau = 0.9\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(bad_tau, "inline"), ConfigError);
}

TEST_CASE("instants experiment: huge delta yields a single-row csv") {
    ExperimentConfig cfg = coarse_config();
    cfg.noise_delta = 100.0;
    InstantsExperiment ex = run_experiment_instants(cfg, "/tmp/eikorec_app_huge");
    CHECK(ex.report.stopping_index == 0);
    std::string csv = slurp("/tmp/eikorec_app_huge/iterates.csv");
    // header plus exactly one data row
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("instants experiment outputs are byte-identical across runs") {
    ExperimentConfig cfg = coarse_config();
    cfg.lm_max_iterations = 8;
    run_experiment_instants(cfg, "/tmp/eikorec_app_det1");
    run_experiment_instants(cfg, "/tmp/eikorec_app_det2");
    for (const char* name : {"iterates.csv", "observation.txt", "report.txt", "config_resolved.txt",
                             "convergence.svg"}) {
        CHECK(slurp(std::string("/tmp/eikorec_app_det1/") + name) ==
              slurp(std::string("/tmp/eikorec_app_det2/") + name));
    }
    // inverse-crime flag reported (data_mesh_h != mesh_h here)
    std::string rep = slurp("/tmp/eikorec_app_det1/report.txt");
    CHECK(rep.find("inverse_crime = no") != std::string::npos);
}

TEST_CASE("inverse crime is flagged when meshes coincide") {
    ExperimentConfig cfg = coarse_config();
    cfg.data_mesh_h = cfg.mesh_h;
    cfg.noise_delta = 1.0;
    run_experiment_instants(cfg, "/tmp/eikorec_app_crime");
    std::string rep = slurp("/tmp/eikorec_app_crime/report.txt");
    CHECK(rep.find("inverse_crime = yes") != std::string::npos);
}

TEST_CASE("check_gradient passes and its negative control fails") {
    ExperimentConfig cfg = coarse_config();
    cfg.beta = 0.1;
    cfg.mesh_h = 0.05;
    GradientCheckResult good = check_gradient(cfg);
    CHECK(good.instant_deviation <= 1e-4);
    CHECK(good.shape_deviation <= 0.05);
    CHECK(good.pass);
    GradientCheckResult bad = check_gradient(cfg, /*corrupt_flux_sign=*/true);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("noise-free data makes the reported gradient nearly zero") {
    ExperimentConfig cfg = coarse_config();
    cfg.noise_delta = 0.0;
    cfg.data_mesh_h = cfg.mesh_h;
    cfg.init_u = cfg.truth_u;
    BoundaryObservation data = make_synthetic_data(cfg);
    Mesh mesh = generate_mesh(cfg.geometry_holes(), cfg.mesh_h, DomainKind::HOLED);
    std::vector<double> g =
        gradient(mesh, cfg.physics(), cfg.truth_u, data.sample(mesh), cfg.solver_options());
    for (double v : g) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("beta sweep writes the csv and reports decreasing distances") {
    ExperimentConfig cfg = coarse_config();
    auto entries = run_beta_sweep(cfg, "/tmp/eikorec_app_beta", {0.1, 0.01, 0.0});
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].h1_distance > entries[1].h1_distance);
    CHECK(entries[2].h1_distance == 0.0);
    std::string csv = slurp("/tmp/eikorec_app_beta/beta_sweep.csv");
    CHECK(csv.rfind("beta,converged,h1_distance", 0) == 0);
}

} // TEST_SUITE
