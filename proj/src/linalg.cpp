#include "eikorec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace eikorec {

SparseMatrix::SparseMatrix(index_t rows, index_t cols,
                           std::vector<index_t> row_offsets,
                           std::vector<index_t> col_indices,
                           std::vector<double> values)
    : rows_(rows), cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (static_cast<index_t>(row_offsets_.size()) != rows_ + 1)
        throw std::invalid_argument("SparseMatrix: row_offsets size mismatch");
    if (col_indices_.size() != values_.size())
        throw std::invalid_argument("SparseMatrix: col/value size mismatch");
    for (index_t i = 0; i < rows_; ++i) {
        for (index_t k = row_offsets_[i] + 1; k < row_offsets_[i + 1]; ++k) {
            if (col_indices_[k - 1] >= col_indices_[k])
                throw std::invalid_argument("SparseMatrix: columns not sorted/unique in row " + std::to_string(i));
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(index_t rows, index_t cols,
                                         const std::vector<index_t>& ti,
                                         const std::vector<index_t>& tj,
                                         const std::vector<double>& tv) {
    std::vector<index_t> offsets(rows + 1, 0);
    for (index_t r : ti) offsets[r + 1]++;
    for (index_t i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];

    std::vector<index_t> cj(ti.size());
    std::vector<double> cv(ti.size());
    {
        std::vector<index_t> cursor(offsets.begin(), offsets.end() - 1);
        for (std::size_t k = 0; k < ti.size(); ++k) {
            index_t pos = cursor[ti[k]]++;
            cj[pos] = tj[k];
            cv[pos] = tv[k];
        }
    }
    // Sort each row and merge duplicates.
    std::vector<index_t> out_offsets(rows + 1, 0);
    std::vector<index_t> out_cols;
    std::vector<double> out_vals;
    out_cols.reserve(ti.size());
    out_vals.reserve(ti.size());
    std::vector<std::pair<index_t, double>> row;
    for (index_t i = 0; i < rows; ++i) {
        row.clear();
        for (index_t k = offsets[i]; k < offsets[i + 1]; ++k)
            row.emplace_back(cj[k], cv[k]);
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (!out_cols.empty() && static_cast<index_t>(out_cols.size()) > out_offsets[i] &&
                out_cols.back() == row[k].first) {
                out_vals.back() += row[k].second;
            } else {
                out_cols.push_back(row[k].first);
                out_vals.push_back(row[k].second);
            }
        }
        out_offsets[i + 1] = static_cast<index_t>(out_cols.size());
    }
    return SparseMatrix(rows, cols, std::move(out_offsets), std::move(out_cols), std::move(out_vals));
}

index_t SparseMatrix::find(index_t i, index_t j) const {
    auto begin = col_indices_.begin() + row_offsets_[i];
    auto end = col_indices_.begin() + row_offsets_[i + 1];
    auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return -1;
    return static_cast<index_t>(it - col_indices_.begin());
}

double SparseMatrix::coeff(index_t i, index_t j) const {
    index_t p = find(i, j);
    return p < 0 ? 0.0 : values_[p];
}

void SparseMatrix::apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(rows_, 0.0);
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            acc += values_[k] * x[col_indices_[k]];
        y[i] = acc;
    }
}

std::vector<double> SparseMatrix::apply(const std::vector<double>& x) const {
    std::vector<double> y;
    apply(x, y);
    return y;
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<index_t> offsets(cols_ + 1, 0);
    for (index_t c : col_indices_) offsets[c + 1]++;
    for (index_t i = 0; i < cols_; ++i) offsets[i + 1] += offsets[i];
    std::vector<index_t> cj(values_.size());
    std::vector<double> cv(values_.size());
    std::vector<index_t> cursor(offsets.begin(), offsets.end() - 1);
    for (index_t i = 0; i < rows_; ++i) {
        for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            index_t pos = cursor[col_indices_[k]]++;
            cj[pos] = i;
            cv[pos] = values_[k];
        }
    }
    // Rows were visited in ascending order, so each transposed row is sorted.
    return SparseMatrix(cols_, rows_, std::move(offsets), std::move(cj), std::move(cv));
}

std::vector<double> SparseMatrix::apply_transpose(const std::vector<double>& x) const {
    return transposed().apply(x);
}

double SparseMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double SparseMatrix::max_asymmetry() const {
    SparseMatrix t = transposed();
    double m = 0.0;
    for (index_t i = 0; i < rows_; ++i) {
        index_t ka = row_offsets_[i], kb = t.row_offsets_[i];
        index_t ea = row_offsets_[i + 1], eb = t.row_offsets_[i + 1];
        while (ka < ea || kb < eb) {
            index_t ca = ka < ea ? col_indices_[ka] : cols_;
            index_t cb = kb < eb ? t.col_indices_[kb] : cols_;
            if (ca == cb) {
                m = std::max(m, std::abs(values_[ka] - t.values_[kb]));
                ++ka; ++kb;
            } else if (ca < cb) {
                m = std::max(m, std::abs(values_[ka]));
                ++ka;
            } else {
                m = std::max(m, std::abs(t.values_[kb]));
                ++kb;
            }
        }
    }
    return m;
}

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, index_t>;

EigenSparse to_eigen(const SparseMatrix& A) {
    Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, index_t>> map(
        A.rows(), A.cols(), A.nnz(), A.row_offsets().data(), A.col_indices().data(), A.values().data());
    return EigenSparse(map);
}

} // namespace

struct DirectFactorization::Impl {
    Eigen::SparseLU<EigenSparse> lu;
    index_t n = 0;
};

DirectFactorization::DirectFactorization(const SparseMatrix& A) : impl_(std::make_unique<Impl>()) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("DirectFactorization: matrix not square");
    impl_->n = A.rows();
    EigenSparse E = to_eigen(A);
    impl_->lu.compute(E);
    if (impl_->lu.info() != Eigen::Success)
        throw SingularMatrix("sparse LU factorization failed (zero pivot)");
}

DirectFactorization::~DirectFactorization() = default;
DirectFactorization::DirectFactorization(DirectFactorization&&) noexcept = default;
DirectFactorization& DirectFactorization::operator=(DirectFactorization&&) noexcept = default;

std::vector<double> DirectFactorization::solve(const std::vector<double>& b) const {
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), impl_->n);
    Eigen::VectorXd x = impl_->lu.solve(bm);
    if (!x.allFinite())
        throw SingularMatrix("sparse LU solve produced non-finite values");
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> DirectFactorization::solve_transpose(const std::vector<double>& b) const {
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), impl_->n);
    Eigen::VectorXd x = impl_->lu.transpose().solve(bm);
    if (!x.allFinite())
        throw SingularMatrix("sparse LU transpose solve produced non-finite values");
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> solve_direct(const SparseMatrix& A, const std::vector<double>& b) {
    return DirectFactorization(A).solve(b);
}

std::vector<double> transpose_solve(const SparseMatrix& A, const std::vector<double>& b) {
    return DirectFactorization(A).solve_transpose(b);
}

namespace {
// Fixed chunk count makes parallel reductions independent of thread count.
constexpr std::size_t kDotChunks = 256;
} // namespace

double deterministic_dot(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    const std::size_t chunk = (n + kDotChunks - 1) / kDotChunks;
    double partial[kDotChunks] = {};
    const std::size_t used = chunk == 0 ? 0 : (n + chunk - 1) / chunk;
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < used; ++c) {
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) acc += a[k] * b[k];
        partial[c] = acc;
    }
    double s = 0.0;
    for (std::size_t c = 0; c < used; ++c) s += partial[c];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(deterministic_dot(a, a)); }

std::vector<double> solve_cg(const SparseMatrix& A, const std::vector<double>& b, const CgOptions& opts,
                             int* iterations) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("solve_cg: matrix not square");
    if (opts.check_symmetry && A.max_asymmetry() > 1e-12)
        throw NotSymmetric("solve_cg: ||A - A^T||_max > 1e-12");

    const index_t n = A.rows();
    std::vector<double> diag_inv(n, 1.0);
    if (opts.preconditioner == Preconditioner::Jacobi) {
        for (index_t i = 0; i < n; ++i) {
            double d = A.coeff(i, i);
            diag_inv[i] = d != 0.0 ? 1.0 / d : 1.0;
        }
    }

    std::vector<double> x(n, 0.0), r = b, z(n), p(n), Ap(n);
    const double bnorm = norm2(b);
    if (iterations) *iterations = 0;
    if (bnorm == 0.0) return x;

#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < n; ++i) z[i] = r[i] * diag_inv[i];
    p = z;
    double rz = deterministic_dot(r, z);

    std::vector<double> best = x;
    double best_res = 1.0;
    for (int it = 0; it < opts.maxit; ++it) {
        A.apply(p, Ap);
        const double pAp = deterministic_dot(p, Ap);
        if (pAp <= 0.0)
            throw NotSymmetric("solve_cg: matrix not positive definite (p^T A p <= 0)");
        const double alpha = rz / pAp;
#pragma omp parallel for schedule(static)
        for (index_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        const double res = norm2(r) / bnorm;
        if (iterations) *iterations = it + 1;
        if (res < best_res) {
            best_res = res;
            best = x;
        }
        if (res <= opts.tol) return x;
#pragma omp parallel for schedule(static)
        for (index_t i = 0; i < n; ++i) z[i] = r[i] * diag_inv[i];
        const double rz_new = deterministic_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
#pragma omp parallel for schedule(static)
        for (index_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw IterationLimit("solve_cg: iteration limit reached", std::move(best), best_res);
}

namespace ref {

void spmv(const SparseMatrix& A, const std::vector<double>& x, std::vector<double>& y) {
    y.assign(A.rows(), 0.0);
    const auto& off = A.row_offsets();
    const auto& col = A.col_indices();
    const auto& val = A.values();
    for (index_t i = 0; i < A.rows(); ++i) {
        double acc = 0.0;
        for (index_t k = off[i]; k < off[i + 1]; ++k) acc += val[k] * x[col[k]];
        y[i] = acc;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    // Same chunked order as deterministic_dot, run serially.
    const std::size_t n = a.size();
    const std::size_t chunk = (n + kDotChunks - 1) / kDotChunks;
    const std::size_t used = chunk == 0 ? 0 : (n + chunk - 1) / chunk;
    double s = 0.0;
    for (std::size_t c = 0; c < used; ++c) {
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) acc += a[k] * b[k];
        s += acc;
    }
    return s;
}

} // namespace ref

} // namespace eikorec
