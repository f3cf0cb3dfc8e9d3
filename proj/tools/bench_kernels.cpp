// Compares the OpenMP assembly/solver kernels against the serial reference
// implementations and reports speedups; also verifies bit-identical output.
#include <chrono>
#include <cstdio>
#include <cstring>

#include <omp.h>

#include "eikorec/prng.hpp"
#include "eikorec/reference.hpp"

using namespace eikorec;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e100;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

int main(int argc, char** argv) {
    double h = argc > 1 ? std::atof(argv[1]) : 0.01;
    int reps = argc > 2 ? std::atoi(argv[2]) : 5;

    std::vector<HoleSpec> holes = {{{0.5, 0.8}, 0.1}, {{0.2, 0.2}, 0.1}, {{0.8, 0.4}, 0.1}};
    Mesh mesh = generate_mesh(holes, h, DomainKind::HOLED);
    std::printf("mesh: h=%g, %d vertices, %d triangles, %d threads\n", h, mesh.vertex_count(),
                mesh.triangle_count(), omp_get_max_threads());

    PhysicsParams params;
    params.epsilon = 0.1;
    params.beta = 0.1;

    NodalField T(mesh);
    for (index_t v = 0; v < mesh.vertex_count(); ++v)
        T.values[v] = standard_normal(7, static_cast<std::uint64_t>(v)) * 0.1;
    NodalField rhs(mesh, 1.0);
    DirichletMap dmap = DirichletMap::constants(mesh, {0.0, 0.1, 0.2});

    // stiffness assembly
    SparseMatrix A_par = assemble_stiffness(mesh, params);
    SparseMatrix A_ser = ref::assemble_stiffness(mesh, params);
    bool same = bit_equal(A_par.values(), A_ser.values());
    double t_par = time_best_of(reps, [&] { assemble_stiffness(mesh, params); });
    double t_ser = time_best_of(reps, [&] { ref::assemble_stiffness(mesh, params); });
    std::printf("stiffness assembly : serial %8.3f ms | omp %8.3f ms | speedup %.2fx | %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par, same ? "bit-identical" : "MISMATCH");

    // linearized operator
    SparseMatrix L_par = assemble_linearized_operator(T, params);
    SparseMatrix L_ser = ref::assemble_linearized_operator(T, params);
    same = bit_equal(L_par.values(), L_ser.values());
    t_par = time_best_of(reps, [&] { assemble_linearized_operator(T, params); });
    t_ser = time_best_of(reps, [&] { ref::assemble_linearized_operator(T, params); });
    std::printf("linearized operator: serial %8.3f ms | omp %8.3f ms | speedup %.2fx | %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par, same ? "bit-identical" : "MISMATCH");

    // residual
    std::vector<double> r_par = eikonal_residual(T, params, dmap, rhs);
    std::vector<double> r_ser = ref::eikonal_residual(T, params, dmap, rhs);
    same = bit_equal(r_par, r_ser);
    t_par = time_best_of(reps, [&] { eikonal_residual(T, params, dmap, rhs); });
    t_ser = time_best_of(reps, [&] { ref::eikonal_residual(T, params, dmap, rhs); });
    std::printf("eikonal residual   : serial %8.3f ms | omp %8.3f ms | speedup %.2fx | %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par, same ? "bit-identical" : "MISMATCH");

    // spmv
    std::vector<double> x(mesh.vertex_count());
    for (index_t v = 0; v < mesh.vertex_count(); ++v)
        x[v] = standard_normal(11, static_cast<std::uint64_t>(v));
    std::vector<double> y_par, y_ser;
    A_par.apply(x, y_par);
    ref::spmv(A_par, x, y_ser);
    same = bit_equal(y_par, y_ser);
    t_par = time_best_of(reps, [&] { A_par.apply(x, y_par); });
    t_ser = time_best_of(reps, [&] { ref::spmv(A_par, x, y_ser); });
    std::printf("sparse matvec      : serial %8.3f ms | omp %8.3f ms | speedup %.2fx | %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par, same ? "bit-identical" : "MISMATCH");

    // dot product
    double d_par = deterministic_dot(x, x);
    double d_ser = ref::dot(x, x);
    same = d_par == d_ser;
    t_par = time_best_of(reps, [&] { deterministic_dot(x, x); });
    t_ser = time_best_of(reps, [&] { ref::dot(x, x); });
    std::printf("dot product        : serial %8.3f ms | omp %8.3f ms | speedup %.2fx | %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par, same ? "bit-identical" : "MISMATCH");

    // CG on the elasticity-type SPD system (gamma K + M)
    {
        PhysicsParams ident;
        ident.epsilon = 1.0;
        ident.conductivity = ConductivityModel::identity();
        SparseMatrix K = assemble_stiffness(mesh, ident);
        SparseMatrix M = assemble_mass(mesh);
        auto& kv = K.values();
        const auto& mv = M.values();
        for (std::size_t k = 0; k < kv.size(); ++k) kv[k] += mv[k];
        std::vector<double> b(mesh.vertex_count(), 1.0);
        CgOptions cg;
        cg.tol = 1e-10;
        double t_cg = time_best_of(reps, [&] { solve_cg(K, b, cg); });
        std::printf("cg solve (spd)     : %8.3f ms\n", t_cg * 1e3);
    }
    return 0;
}
