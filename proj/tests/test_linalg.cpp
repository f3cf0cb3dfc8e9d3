#include <doctest.h>

#include <cmath>

#include "eikorec/fem.hpp"
#include "eikorec/prng.hpp"
#include "eikorec/reference.hpp"

using namespace eikorec;

namespace {

SparseMatrix identity_matrix(index_t n) {
    std::vector<index_t> off(n + 1), col(n);
    std::vector<double> val(n, 1.0);
    for (index_t i = 0; i <= n; ++i) off[i] = i;
    for (index_t i = 0; i < n; ++i) col[i] = i;
    return SparseMatrix(n, n, std::move(off), std::move(col), std::move(val));
}

SparseMatrix dense_to_sparse(index_t n, const std::vector<double>& a) {
    std::vector<index_t> ti, tj;
    std::vector<double> tv;
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j)
            if (a[i * n + j] != 0.0) {
                ti.push_back(i);
                tj.push_back(j);
                tv.push_back(a[i * n + j]);
            }
    return SparseMatrix::from_triplets(n, n, ti, tj, tv);
}

std::vector<double> seeded_vector(index_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    for (index_t i = 0; i < n; ++i) v[i] = standard_normal(seed, i);
    return v;
}

// Random SPD matrix A = L L^T from a seeded sparse lower-triangular L.
SparseMatrix seeded_spd(index_t n, std::uint64_t seed) {
    std::vector<double> dense(n * n, 0.0);
    std::vector<double> L(n * n, 0.0);
    for (index_t i = 0; i < n; ++i) {
        L[i * n + i] = 1.0 + uniform01(seed, 1000 + i);
        for (index_t j = 0; j < i; ++j)
            if (uniform01(seed, i * 131 + j) < 0.15)
                L[i * n + j] = standard_normal(seed, 5000 + i * 977 + j) * 0.3;
    }
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (index_t k = 0; k < n; ++k) s += L[i * n + k] * L[j * n + k];
            dense[i * n + j] = s;
        }
    return dense_to_sparse(n, dense);
}

} // namespace

TEST_SUITE("linalg") {

TEST_CASE("solve_direct identity returns rhs") {
    SparseMatrix A = identity_matrix(7);
    std::vector<double> b = seeded_vector(7, 1);
    std::vector<double> x = solve_direct(A, b);
    for (int i = 0; i < 7; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-15));
}

TEST_CASE("solve_direct 2x2 hand example") {
    SparseMatrix A = dense_to_sparse(2, {2, 1, 1, 2});
    std::vector<double> x = solve_direct(A, {3, 3});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("solve_direct residual bound on seeded SPD") {
    SparseMatrix A = seeded_spd(50, 42);
    std::vector<double> b = seeded_vector(50, 7);
    std::vector<double> x = solve_direct(A, b);
    std::vector<double> Ax = A.apply(x);
    double rnorm = 0.0, xnorm = 0.0, bnorm = 0.0;
    for (int i = 0; i < 50; ++i) {
        rnorm += (Ax[i] - b[i]) * (Ax[i] - b[i]);
        xnorm += x[i] * x[i];
        bnorm += b[i] * b[i];
    }
    rnorm = std::sqrt(rnorm);
    CHECK(rnorm <= 1e-10 * (A.frobenius_norm() * std::sqrt(xnorm) + std::sqrt(bnorm)));
}

TEST_CASE("solve_direct recovers x0 for well-conditioned seeded systems") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        SparseMatrix A = seeded_spd(40, seed);
        std::vector<double> x0 = seeded_vector(40, seed + 100);
        std::vector<double> x = solve_direct(A, A.apply(x0));
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 40; ++i) {
            num += (x[i] - x0[i]) * (x[i] - x0[i]);
            den += x0[i] * x0[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-9);
    }
}

TEST_CASE("solve_cg identity converges in one iteration") {
    SparseMatrix A = identity_matrix(20);
    std::vector<double> b = seeded_vector(20, 2);
    int iters = 0;
    std::vector<double> x = solve_cg(A, b, {}, &iters);
    CHECK(iters == 1);
    for (int i = 0; i < 20; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("solve_cg diagonal with Jacobi converges in one iteration") {
    const index_t n = 30;
    std::vector<double> dense(n * n, 0.0);
    for (index_t i = 0; i < n; ++i) dense[i * n + i] = static_cast<double>(i + 1);
    SparseMatrix A = dense_to_sparse(n, dense);
    std::vector<double> b = seeded_vector(n, 3);
    int iters = 0;
    CgOptions opts;
    opts.preconditioner = Preconditioner::Jacobi;
    std::vector<double> x = solve_cg(A, b, opts, &iters);
    CHECK(iters == 1);
    for (index_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(b[i] / (i + 1)).epsilon(1e-12));
}

TEST_CASE("solve_cg matches solve_direct on a FEM stiffness matrix") {
    Mesh mesh = generate_mesh({}, 0.1, DomainKind::HOLED);
    PhysicsParams params;
    params.epsilon = 1.0;
    params.beta = 0.5;
    params.conductivity = ConductivityModel::identity();
    SparseMatrix K = assemble_stiffness(mesh, params);
    // shift by the mass matrix (pure Neumann stiffness is singular)
    SparseMatrix M = assemble_mass(mesh);
    auto& kv = K.values();
    for (std::size_t k = 0; k < kv.size(); ++k) kv[k] += M.values()[k];
    std::vector<double> b = seeded_vector(mesh.vertex_count(), 9);
    CgOptions opts;
    opts.tol = 1e-12;
    std::vector<double> x_cg = solve_cg(K, b, opts);
    std::vector<double> x_lu = solve_direct(K, b);
    double num = 0.0, den = 0.0;
    for (index_t i = 0; i < mesh.vertex_count(); ++i) {
        num += (x_cg[i] - x_lu[i]) * (x_cg[i] - x_lu[i]);
        den += x_lu[i] * x_lu[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-8);
}

TEST_CASE("solve_cg reports iteration limit with best iterate") {
    SparseMatrix A = seeded_spd(40, 12);
    std::vector<double> b = seeded_vector(40, 13);
    CgOptions opts;
    opts.tol = 1e-14;
    opts.maxit = 2;
    try {
        solve_cg(A, b, opts);
        FAIL("expected IterationLimit");
    } catch (const IterationLimit& e) {
        CHECK(e.best_iterate.size() == 40);
        CHECK(e.relative_residual > 0.0);
    }
}

TEST_CASE("transpose_solve hand example and symmetric agreement") {
    SparseMatrix A = dense_to_sparse(2, {1, 2, 0, 1});
    std::vector<double> x = transpose_solve(A, {1, 1});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-1.0).epsilon(1e-14));

    SparseMatrix S = seeded_spd(25, 21);
    std::vector<double> b = seeded_vector(25, 22);
    std::vector<double> xs = solve_direct(S, b);
    std::vector<double> xt = transpose_solve(S, b);
    for (int i = 0; i < 25; ++i) CHECK(xt[i] == doctest::Approx(xs[i]).epsilon(1e-10));
}

TEST_CASE("transpose adjoint identity on seeded sparse matrix") {
    const index_t n = 100;
    std::vector<index_t> ti, tj;
    std::vector<double> tv;
    for (index_t i = 0; i < n; ++i) {
        ti.push_back(i);
        tj.push_back(i);
        tv.push_back(2.0 + uniform01(31, i));
        for (int k = 0; k < 4; ++k) {
            index_t j = static_cast<index_t>(uniform01(32, i * 7 + k) * n);
            ti.push_back(i);
            tj.push_back(std::min<index_t>(j, n - 1));
            tv.push_back(standard_normal(33, i * 11 + k));
        }
    }
    SparseMatrix A = SparseMatrix::from_triplets(n, n, ti, tj, tv);
    std::vector<double> x = seeded_vector(n, 34), y = seeded_vector(n, 35);
    std::vector<double> Ax = A.apply(x);
    std::vector<double> Aty = A.apply_transpose(y);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (index_t i = 0; i < n; ++i) {
        lhs += Ax[i] * y[i];
        rhs += x[i] * Aty[i];
        scale += std::abs(Ax[i] * y[i]);
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, scale));
}

TEST_CASE("deterministic_dot equals serial reference bit-exactly") {
    std::vector<double> a = seeded_vector(10007, 51), b = seeded_vector(10007, 52);
    CHECK(deterministic_dot(a, b) == ref::dot(a, b));
}

TEST_CASE("parallel kernels bit-identical to serial reference") {
    Mesh mesh = generate_mesh({{{0.5, 0.5}, 0.1}}, 0.05, DomainKind::HOLED);
    PhysicsParams params;
    params.epsilon = 0.1;
    params.beta = 0.1;
    NodalField T(mesh);
    for (index_t v = 0; v < mesh.vertex_count(); ++v) T.values[v] = standard_normal(61, v) * 0.1;
    NodalField rhs(mesh, 1.0);
    DirichletMap dmap = DirichletMap::constants(mesh, {0.3});

    SparseMatrix A1 = assemble_stiffness(mesh, params);
    SparseMatrix A2 = ref::assemble_stiffness(mesh, params);
    REQUIRE(A1.values().size() == A2.values().size());
    bool same = true;
    for (std::size_t k = 0; k < A1.values().size(); ++k) same &= A1.values()[k] == A2.values()[k];
    CHECK(same);

    SparseMatrix L1 = assemble_linearized_operator(T, params);
    SparseMatrix L2 = ref::assemble_linearized_operator(T, params);
    same = true;
    for (std::size_t k = 0; k < L1.values().size(); ++k) same &= L1.values()[k] == L2.values()[k];
    CHECK(same);

    std::vector<double> r1 = eikonal_residual(T, params, dmap, rhs);
    std::vector<double> r2 = ref::eikonal_residual(T, params, dmap, rhs);
    same = true;
    for (std::size_t k = 0; k < r1.size(); ++k) same &= r1[k] == r2[k];
    CHECK(same);

    std::vector<double> x = seeded_vector(mesh.vertex_count(), 77);
    std::vector<double> y1, y2;
    A1.apply(x, y1);
    ref::spmv(A1, x, y2);
    same = true;
    for (std::size_t k = 0; k < y1.size(); ++k) same &= y1[k] == y2[k];
    CHECK(same);
}

TEST_CASE("not-symmetric detection") {
    SparseMatrix A = dense_to_sparse(2, {1, 2, 0, 1});
    CgOptions opts;
    opts.check_symmetry = true;
    CHECK_THROWS_AS(solve_cg(A, {1, 1}, opts), NotSymmetric);
}

} // TEST_SUITE
