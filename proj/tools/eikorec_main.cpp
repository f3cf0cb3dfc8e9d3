#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eikorec/experiments.hpp"

using namespace eikorec;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    double mesh_h = 0.0;
    double data_mesh_h = 0.0;
    double delta = -1.0;

    ExperimentConfig load() const {
        ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
        if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
        if (mesh_h > 0.0) c.mesh_h = mesh_h;
        if (data_mesh_h > 0.0) c.data_mesh_h = data_mesh_h;
        if (delta >= 0.0) c.noise_delta = delta;
        if (!out_dir.empty()) c.output_dir = out_dir;
        c.validate();
        return c;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (key = value lines)");
    cmd->add_option("--seed", args.seed, "noise seed (overrides config)");
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--mesh-h", args.mesh_h, "forward mesh size (overrides config)");
    cmd->add_option("--data-mesh-h", args.data_mesh_h, "data-generation mesh size (overrides config)");
}

// "delta:seed" pairs for --sweep
std::vector<std::pair<double, std::uint64_t>> parse_sweep(const std::vector<std::string>& specs) {
    std::vector<std::pair<double, std::uint64_t>> runs;
    for (const std::string& s : specs) {
        std::size_t colon = s.find(':');
        if (colon == std::string::npos) throw ConfigError("--sweep expects delta:seed pairs");
        runs.emplace_back(std::stod(s.substr(0, colon)),
                          static_cast<std::uint64_t>(std::stoull(s.substr(colon + 1))));
    }
    return runs;
}

std::string run_dir(const std::string& base, double delta, std::uint64_t seed) {
    std::ostringstream ss;
    ss << base << "/run_d" << delta << "_s" << seed;
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Activation-instant reconstruction for the viscous Eikonal model"};
    app.require_subcommand(1);

    CommonArgs mesh_args, data_args, fwd_args, inst_args, joint_args, grad_args, beta_args;
    std::vector<std::string> inst_sweep, joint_sweep;
    bool corrupt_sign = false;

    CLI::App* cmd_mesh = app.add_subcommand("mesh", "generate and save a mesh");
    add_common(cmd_mesh, mesh_args);
    bool mesh_full = false;
    cmd_mesh->add_flag("--full", mesh_full, "mesh the full domain (holes included)");

    CLI::App* cmd_data = app.add_subcommand("make-data", "generate synthetic boundary data");
    add_common(cmd_data, data_args);
    cmd_data->add_option("--delta", data_args.delta, "relative noise level (overrides config)");

    CLI::App* cmd_fwd = app.add_subcommand("forward", "forward solve at the truth configuration");
    add_common(cmd_fwd, fwd_args);

    CLI::App* cmd_inst = app.add_subcommand("invert-instants", "Levenberg-Marquardt instant reconstruction");
    add_common(cmd_inst, inst_args);
    cmd_inst->add_option("--delta", inst_args.delta, "relative noise level (overrides config)");
    cmd_inst->add_option("--sweep", inst_sweep, "delta:seed pairs, fan out runs");

    CLI::App* cmd_joint = app.add_subcommand("invert-joint", "joint position + instant reconstruction");
    add_common(cmd_joint, joint_args);
    cmd_joint->add_option("--delta", joint_args.delta, "relative noise level (overrides config)");
    cmd_joint->add_option("--sweep", joint_sweep, "delta:seed pairs, fan out runs");

    CLI::App* cmd_grad = app.add_subcommand("check-gradient", "FD validation of gradient and shape derivative");
    add_common(cmd_grad, grad_args);
    cmd_grad->add_flag("--corrupt-flux-sign", corrupt_sign, "negative control (must fail)");

    CLI::App* cmd_beta = app.add_subcommand("beta-sweep", "state solves along a decreasing beta list");
    add_common(cmd_beta, beta_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_mesh) {
            ExperimentConfig c = mesh_args.load();
            ensure_directory(c.output_dir);
            Mesh m = generate_mesh(c.geometry_holes(), c.mesh_h,
                                   mesh_full ? DomainKind::FULL : DomainKind::HOLED);
            std::string path = c.output_dir + "/mesh.txt";
            save_mesh(m, path);
            std::printf("wrote %s: %d vertices, %d triangles, min angle %.2f deg, area %.12g\n",
                        path.c_str(), m.vertex_count(), m.triangle_count(), m.min_angle_deg(),
                        m.total_area());
        } else if (*cmd_data) {
            ExperimentConfig c = data_args.load();
            ensure_directory(c.output_dir);
            BoundaryObservation obs = make_synthetic_data(c);
            save_observation(obs, c.output_dir + "/observation.txt");
            std::printf("wrote %s/observation.txt: %zu breakpoints, delta %.3g, ||eta|| %.6g\n",
                        c.output_dir.c_str(), obs.arclength.size(), obs.delta, obs.eta_norm);
        } else if (*cmd_fwd) {
            ExperimentConfig c = fwd_args.load();
            run_forward(c, c.output_dir);
            std::printf("wrote %s/trace.csv and forward_report.txt\n", c.output_dir.c_str());
        } else if (*cmd_inst) {
            ExperimentConfig c = inst_args.load();
            if (!inst_sweep.empty()) {
                auto runs = parse_sweep(inst_sweep);
#pragma omp parallel for schedule(dynamic)
                for (std::size_t k = 0; k < runs.size(); ++k) {
                    ExperimentConfig ck = c;
                    ck.noise_delta = runs[k].first;
                    ck.seed = runs[k].second;
                    run_experiment_instants(ck, run_dir(c.output_dir, ck.noise_delta, ck.seed));
                }
                std::printf("sweep finished: %zu runs under %s\n", runs.size(), c.output_dir.c_str());
            } else {
                InstantsExperiment ex = run_experiment_instants(c, c.output_dir);
                std::printf("stop %s at k=%d, residual %.6g, |u - u_truth| %.6g\n",
                            to_string(ex.report.reason).c_str(), ex.report.stopping_index,
                            ex.report.iterates.back().residual_norm, ex.report.final_u_error);
            }
        } else if (*cmd_joint) {
            ExperimentConfig c = joint_args.load();
            if (!joint_sweep.empty()) {
                auto runs = parse_sweep(joint_sweep);
                std::vector<JointExperimentRow> rows(runs.size());
#pragma omp parallel for schedule(dynamic)
                for (std::size_t k = 0; k < runs.size(); ++k) {
                    ExperimentConfig ck = c;
                    ck.noise_delta = runs[k].first;
                    ck.seed = runs[k].second;
                    rows[k] = run_experiment_joint(ck, run_dir(c.output_dir, ck.noise_delta, ck.seed)).row;
                }
                ensure_directory(c.output_dir);
                write_joint_table(rows, c.output_dir + "/table.csv");
                std::printf("sweep finished: %zu runs under %s\n", runs.size(), c.output_dir.c_str());
            } else {
                JointExperiment ex = run_experiment_joint(c, c.output_dir);
                std::printf("stop %s at k=%d, residual %.6g, |u - u_truth| %.6g, max d %.6g\n",
                            to_string(ex.report.reason).c_str(), ex.report.stopping_index,
                            ex.row.residual, ex.row.u_error,
                            *std::max_element(ex.row.center_dist.begin(), ex.row.center_dist.end()));
            }
        } else if (*cmd_grad) {
            ExperimentConfig c = grad_args.load();
            GradientCheckResult r = check_gradient(c, corrupt_sign, &std::cout);
            std::printf("instant gradient max rel dev: %.3g (tol 1e-4)\n", r.instant_deviation);
            std::printf("shape derivative rel dev:     %.3g (tol 0.05)\n", r.shape_deviation);
            std::printf("%s\n", r.pass ? "PASS" : "FAIL");
            return r.pass ? 0 : 1;
        } else if (*cmd_beta) {
            ExperimentConfig c = beta_args.load();
            auto entries = run_beta_sweep(c, c.output_dir);
            std::printf("beta      converged  ||T_beta - T_0||_H1\n");
            for (const auto& e : entries)
                std::printf("%-9.3g %-10s %.8g\n", e.beta, e.converged ? "yes" : "no", e.h1_distance);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
