#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace snodri {

/// Execution policy for the data-parallel kernels. Both paths produce
/// bit-identical results; `parallel` falls back to serial when OpenMP is
/// not compiled in or the problem is too small to pay for a team.
enum class Exec { serial, parallel };

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
    std::span<const double> row(std::size_t i) const { return {row_ptr(i), cols_}; }
    std::span<double> row(std::size_t i) { return {row_ptr(i), cols_}; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    std::span<const double> column_copy_into(std::size_t j, std::vector<double>& out) const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Kernels. Each has a serial reference implementation (`*_serial`) and an
// OpenMP row-parallel path; every output element is accumulated in the same
// fixed order on both paths, so results match bitwise and are independent
// of the thread count. The serial versions are kept as the reference the
// tests and the benchmark compare against.

/// out = a * b
void matmul_serial(const Matrix& a, const Matrix& b, Matrix& out);
void matmul(const Matrix& a, const Matrix& b, Matrix& out, Exec exec);
Matrix matmul(const Matrix& a, const Matrix& b, Exec exec = Exec::parallel);

/// out = a^T * b  (a: n x m, b: n x k, out: m x k)
void matmul_at_b_serial(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out, Exec exec);
Matrix matmul_at_b(const Matrix& a, const Matrix& b, Exec exec = Exec::parallel);

/// out = a * b^T  (a: n x m, b: k x m, out: n x k)
void matmul_a_bt_serial(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out, Exec exec);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b, Exec exec = Exec::parallel);

/// m(i, :) += v for every row i.
void add_row_vector(Matrix& m, std::span<const double> v, Exec exec = Exec::parallel);

/// Elementwise tanh in place.
void apply_tanh(Matrix& m, Exec exec = Exec::parallel);

/// Column sums; per-column accumulation runs over rows in ascending order.
void column_sums(const Matrix& m, std::span<double> out, Exec exec = Exec::parallel);

}  // namespace snodri
