#include "snodri/matrix.hpp"

#include "snodri/errors.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace snodri {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelThreshold = 16 * 1024;

bool go_parallel(Exec exec, std::size_t work) {
#ifdef _OPENMP
    return exec == Exec::parallel && work >= kParallelThreshold;
#else
    (void)exec;
    (void)work;
    return false;
#endif
}

inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    const std::size_t kk = a.cols();
    const std::size_t nn = b.cols();
    double* orow = out.row_ptr(i);
    std::fill(orow, orow + nn, 0.0);
    for (std::size_t k = 0; k < kk; ++k) {
        const double aik = a(i, k);
        const double* brow = b.row_ptr(k);
        for (std::size_t j = 0; j < nn; ++j) orow[j] += aik * brow[j];
    }
}

inline void matmul_at_b_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t m) {
    // out(m, :) = sum_n a(n, m) * b(n, :)
    const std::size_t nn = a.rows();
    const std::size_t kk = b.cols();
    double* orow = out.row_ptr(m);
    std::fill(orow, orow + kk, 0.0);
    for (std::size_t n = 0; n < nn; ++n) {
        const double anm = a(n, m);
        const double* brow = b.row_ptr(n);
        for (std::size_t j = 0; j < kk; ++j) orow[j] += anm * brow[j];
    }
}

inline void matmul_a_bt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    const std::size_t mm = a.cols();
    const std::size_t kk = b.rows();
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (std::size_t k = 0; k < kk; ++k) {
        const double* brow = b.row_ptr(k);
        double s = 0.0;
        for (std::size_t m = 0; m < mm; ++m) s += arow[m] * brow[m];
        orow[k] = s;
    }
}

void check_matmul(const Matrix& a, const Matrix& b, std::size_t inner_a, std::size_t inner_b) {
    if (inner_a != inner_b) throw DataError("matmul: inner dimension mismatch");
    (void)a;
    (void)b;
}

}  // namespace

std::span<const double> Matrix::column_copy_into(std::size_t j, std::vector<double>& out) const {
    out.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

void matmul_serial(const Matrix& a, const Matrix& b, Matrix& out) {
    check_matmul(a, b, a.cols(), b.rows());
    out = Matrix(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
    check_matmul(a, b, a.cols(), b.rows());
    out = Matrix(a.rows(), b.cols());
    const std::size_t work = a.rows() * a.cols() * b.cols();
    if (go_parallel(exec, work)) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(a.rows()); ++i) {
            matmul_row(a, b, out, static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
    }
}

Matrix matmul(const Matrix& a, const Matrix& b, Exec exec) {
    Matrix out;
    matmul(a, b, out, exec);
    return out;
}

void matmul_at_b_serial(const Matrix& a, const Matrix& b, Matrix& out) {
    check_matmul(a, b, a.rows(), b.rows());
    out = Matrix(a.cols(), b.cols());
    for (std::size_t m = 0; m < a.cols(); ++m) matmul_at_b_row(a, b, out, m);
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
    check_matmul(a, b, a.rows(), b.rows());
    out = Matrix(a.cols(), b.cols());
    const std::size_t work = a.rows() * a.cols() * b.cols();
    if (go_parallel(exec, work)) {
#pragma omp parallel for schedule(static)
        for (long long m = 0; m < static_cast<long long>(a.cols()); ++m) {
            matmul_at_b_row(a, b, out, static_cast<std::size_t>(m));
        }
    } else {
        for (std::size_t m = 0; m < a.cols(); ++m) matmul_at_b_row(a, b, out, m);
    }
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b, Exec exec) {
    Matrix out;
    matmul_at_b(a, b, out, exec);
    return out;
}

void matmul_a_bt_serial(const Matrix& a, const Matrix& b, Matrix& out) {
    check_matmul(a, b, a.cols(), b.cols());
    out = Matrix(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) matmul_a_bt_row(a, b, out, i);
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
    check_matmul(a, b, a.cols(), b.cols());
    out = Matrix(a.rows(), b.rows());
    const std::size_t work = a.rows() * a.cols() * b.rows();
    if (go_parallel(exec, work)) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(a.rows()); ++i) {
            matmul_a_bt_row(a, b, out, static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < a.rows(); ++i) matmul_a_bt_row(a, b, out, i);
    }
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b, Exec exec) {
    Matrix out;
    matmul_a_bt(a, b, out, exec);
    return out;
}

void add_row_vector(Matrix& m, std::span<const double> v, Exec exec) {
    if (v.size() != m.cols()) throw DataError("add_row_vector: width mismatch");
    if (go_parallel(exec, m.size())) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(m.rows()); ++i) {
            double* r = m.row_ptr(static_cast<std::size_t>(i));
            for (std::size_t j = 0; j < m.cols(); ++j) r[j] += v[j];
        }
    } else {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double* r = m.row_ptr(i);
            for (std::size_t j = 0; j < m.cols(); ++j) r[j] += v[j];
        }
    }
}

void apply_tanh(Matrix& m, Exec exec) {
    auto d = m.data();
    if (go_parallel(exec, d.size() * 8)) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(d.size()); ++i) {
            d[static_cast<std::size_t>(i)] = std::tanh(d[static_cast<std::size_t>(i)]);
        }
    } else {
        for (double& x : d) x = std::tanh(x);
    }
}

void column_sums(const Matrix& m, std::span<double> out, Exec exec) {
    if (out.size() != m.cols()) throw DataError("column_sums: width mismatch");
    if (go_parallel(exec, m.size())) {
#pragma omp parallel for schedule(static)
        for (long long j = 0; j < static_cast<long long>(m.cols()); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, static_cast<std::size_t>(j));
            out[static_cast<std::size_t>(j)] = s;
        }
    } else {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j);
            out[j] = s;
        }
    }
}

}  // namespace snodri
