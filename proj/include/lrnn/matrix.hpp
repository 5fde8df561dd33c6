#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace lrnn {

/// Dense row-major matrix of 64-bit reals. The single carrier type for all
/// linear algebra in this project; vectors are n x 1 matrices.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    static Matrix identity(std::size_t n);
    static Matrix ones(std::size_t rows, std::size_t cols);
    static Matrix column(const std::vector<double>& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const;
    double max_abs() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

bool operator==(const Matrix& a, const Matrix& b);  // exact, bitwise on entries
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix m);
Matrix operator*(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
double trace(const Matrix& m);

/// Kronecker product [a_ij * B].
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking of m into a (rows*cols) x 1 vector.
Matrix vec(const Matrix& m);

/// Inverse of vec: v must have rows*cols entries.
Matrix unvec(const Matrix& v, std::size_t rows, std::size_t cols);

/// Checks tr(B X' C Y D) == vec(X)' [(B (x) I)' (D' (x) C)] vec(Y) to 1e-10
/// relative tolerance. Throws on non-conformable dimensions.
bool trace_bilinear_check(const Matrix& b, const Matrix& x, const Matrix& c,
                          const Matrix& y, const Matrix& d);

/// Raised when a Cholesky pivot is not positive; carries the pivot index.
struct NotPositiveDefinite : std::runtime_error {
    std::size_t pivot_index;
    explicit NotPositiveDefinite(std::size_t idx);
};

/// Minimizer of 0.5 z'Hz + f'z for symmetric positive definite H, i.e. the
/// solution of H z = -f. H must be symmetric within 1e-9 relative; a
/// non-positive pivot below 1e-12 raises NotPositiveDefinite.
Matrix solve_spd(const Matrix& h, const Matrix& f);

}  // namespace lrnn
