#include "lrnn/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace lrnn {

namespace {

[[noreturn]] void dim_error(const char* op, const Matrix& a, const Matrix& b) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: zero dimension");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("Matrix: empty initializer");
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
        if (row.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::ones(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 1.0); }

Matrix Matrix::column(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    m.data() = v;
    return m;
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) dim_error("add", *this, o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) dim_error("sub", *this, o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.data() == b.data();
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) dim_error("matmul", a, b);
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* oi = out.row_ptr(i);
        const double* ai = a.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) oi[j] += aik * bk[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

double trace(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("trace: matrix not square");
    double t = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t p = 0; p < b.rows(); ++p) {
                double* dst = out.row_ptr(i * b.rows() + p) + j * b.cols();
                const double* src = b.row_ptr(p);
                for (std::size_t q = 0; q < b.cols(); ++q) dst[q] = aij * src[q];
            }
        }
    return out;
}

Matrix vec(const Matrix& m) {
    Matrix out(m.rows() * m.cols(), 1);
    std::size_t k = 0;
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) out(k++, 0) = m(i, j);
    return out;
}

Matrix unvec(const Matrix& v, std::size_t rows, std::size_t cols) {
    if (v.cols() != 1 || v.rows() != rows * cols)
        throw std::invalid_argument("unvec: vector length does not match target shape");
    Matrix out(rows, cols);
    std::size_t k = 0;
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) out(i, j) = v(k++, 0);
    return out;
}

bool trace_bilinear_check(const Matrix& b, const Matrix& x, const Matrix& c,
                          const Matrix& y, const Matrix& d) {
    // tr(B X' C Y D) needs B X' C Y D square and conformable throughout.
    if (b.cols() != x.cols() || x.rows() != c.rows() || c.cols() != y.rows() ||
        y.cols() != d.rows() || d.cols() != b.rows())
        throw std::invalid_argument("trace_bilinear_check: non-conformable dimensions");

    const double lhs = trace(b * transpose(x) * c * y * d);
    const Matrix middle =
        transpose(kron(b, Matrix::identity(x.rows()))) * kron(transpose(d), c);
    const Matrix rhs_m = transpose(vec(x)) * middle * vec(y);
    const double rhs = rhs_m(0, 0);

    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return std::abs(lhs - rhs) <= 1e-10 * scale;
}

NotPositiveDefinite::NotPositiveDefinite(std::size_t idx)
    : std::runtime_error("solve_spd: non-positive pivot at index " + std::to_string(idx)),
      pivot_index(idx) {}

Matrix solve_spd(const Matrix& h, const Matrix& f) {
    const std::size_t n = h.rows();
    if (h.cols() != n) throw std::invalid_argument("solve_spd: H not square");
    if (f.rows() != n || f.cols() != 1) throw std::invalid_argument("solve_spd: bad f shape");

    const double scale = h.max_abs();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(h(i, j) - h(j, i)) > 1e-9 * std::max(1.0, scale))
                throw std::invalid_argument("solve_spd: H not symmetric");

    // Lower Cholesky factor, in place on a copy.
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = h(i, j);
            const double* li = l.row_ptr(i);
            const double* lj = l.row_ptr(j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            if (i == j) {
                if (s < 1e-12) throw NotPositiveDefinite(i);
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }

    auto cholesky_solve = [&](std::vector<double> rhs) {
        for (std::size_t i = 0; i < n; ++i) {  // L w = rhs
            const double* li = l.row_ptr(i);
            double s = rhs[i];
            for (std::size_t k = 0; k < i; ++k) s -= li[k] * rhs[k];
            rhs[i] = s / li[i];
        }
        for (std::size_t ii = n; ii-- > 0;) {  // L' z = w
            double s = rhs[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * rhs[k];
            rhs[ii] = s / l(ii, ii);
        }
        return rhs;
    };

    std::vector<double> neg_f(n);
    for (std::size_t i = 0; i < n; ++i) neg_f[i] = -f(i, 0);
    std::vector<double> z = cholesky_solve(neg_f);

    // One refinement step, then enforce the residual contract.
    auto residual = [&](const std::vector<double>& zz) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = f(i, 0);
            const double* hi = h.row_ptr(i);
            for (std::size_t k = 0; k < n; ++k) s += hi[k] * zz[k];
            r[i] = s;
        }
        return r;
    };
    double fmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) fmax = std::max(fmax, std::abs(f(i, 0)));

    std::vector<double> r = residual(z);
    double rmax = 0.0;
    for (double v : r) rmax = std::max(rmax, std::abs(v));
    if (rmax > 1e-10 * (1.0 + fmax)) {
        for (double& v : r) v = -v;
        std::vector<double> corr = cholesky_solve(r);
        for (std::size_t i = 0; i < n; ++i) z[i] += corr[i];
        r = residual(z);
        rmax = 0.0;
        for (double v : r) rmax = std::max(rmax, std::abs(v));
    }
    if (rmax > 1e-8 * (1.0 + fmax))
        throw std::runtime_error("solve_spd: residual " + std::to_string(rmax) +
                                 " exceeds tolerance");

    Matrix out = Matrix::column(z);
    if (!out.all_finite()) throw std::runtime_error("solve_spd: non-finite solution");
    return out;
}

}  // namespace lrnn
