#ifndef EIKOREC_LINALG_HPP
#define EIKOREC_LINALG_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "eikorec/errors.hpp"

namespace eikorec {

using index_t = std::int32_t;

// Compressed-row sparse matrix. Column indices are sorted and unique per
// row; explicit zeros are allowed (Dirichlet elimination keeps the pattern).
class SparseMatrix {
  public:
    SparseMatrix() = default;
    SparseMatrix(index_t rows, index_t cols,
                 std::vector<index_t> row_offsets,
                 std::vector<index_t> col_indices,
                 std::vector<double> values);

    // Builds from unsorted (i, j, v) triplets; duplicates are summed.
    static SparseMatrix from_triplets(index_t rows, index_t cols,
                                      const std::vector<index_t>& ti,
                                      const std::vector<index_t>& tj,
                                      const std::vector<double>& tv);

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    const std::vector<index_t>& row_offsets() const { return row_offsets_; }
    const std::vector<index_t>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    // Position of entry (i, j) in the value array, or -1 if not in pattern.
    index_t find(index_t i, index_t j) const;
    double coeff(index_t i, index_t j) const;

    // y = A x, OpenMP-parallel over rows (bit-deterministic: each row is a
    // serial sum).
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> apply(const std::vector<double>& x) const;

    // y = A^T x via an explicitly built transpose.
    std::vector<double> apply_transpose(const std::vector<double>& x) const;

    SparseMatrix transposed() const;

    double frobenius_norm() const;
    double max_abs() const;
    // max_ij |A - A^T|_ij over the union pattern.
    double max_asymmetry() const;

  private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<index_t> row_offsets_;
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

// Sparse LU factorization reusable across right-hand sides; solves with A
// and A^T from the same factorization. Read-only after construction.
class DirectFactorization {
  public:
    explicit DirectFactorization(const SparseMatrix& A);
    ~DirectFactorization();
    DirectFactorization(DirectFactorization&&) noexcept;
    DirectFactorization& operator=(DirectFactorization&&) noexcept;

    std::vector<double> solve(const std::vector<double>& b) const;
    std::vector<double> solve_transpose(const std::vector<double>& b) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<double> solve_direct(const SparseMatrix& A, const std::vector<double>& b);
std::vector<double> transpose_solve(const SparseMatrix& A, const std::vector<double>& b);

enum class Preconditioner { None, Jacobi };

struct CgOptions {
    double tol = 1e-10;
    int maxit = 10000;
    Preconditioner preconditioner = Preconditioner::Jacobi;
    bool check_symmetry = false;
};

// Conjugate gradients for SPD systems. Reductions use a fixed chunk
// decomposition, so results are bit-identical for any thread count.
std::vector<double> solve_cg(const SparseMatrix& A, const std::vector<double>& b, const CgOptions& opts = {},
                             int* iterations = nullptr);

// Deterministic chunked reductions (shared by CG and the norms).
double deterministic_dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

// Serial reference kernels. These mirror the OpenMP implementations above
// and stay bit-identical to them; tests and the kernel benchmark compare
// the two paths.
namespace ref {
void spmv(const SparseMatrix& A, const std::vector<double>& x, std::vector<double>& y);
double dot(const std::vector<double>& a, const std::vector<double>& b);
} // namespace ref

} // namespace eikorec

#endif
