#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gmpflow/error.hpp"

namespace gmpflow::nk {

using Vec = std::vector<double>;

class SingularMatrixError : public IndexedError {
public:
    explicit SingularMatrixError(std::size_t pivot) : IndexedError("singular matrix at pivot", pivot) {}
};

class NotPositiveDefiniteError : public IndexedError {
public:
    explicit NotPositiveDefiniteError(std::size_t minor)
        : IndexedError("matrix not positive definite at leading minor", minor) {}
};

class NotSymmetricError : public NumericalError {
public:
    NotSymmetricError() : NumericalError("matrix is not symmetric") {}
};

class NoSignChangeError : public NumericalError {
public:
    NoSignChangeError() : NumericalError("bracket has no sign change") {}
};

// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix diag(const Vec& d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    const double* data() const noexcept { return a_.data(); }

    Matrix transpose() const;
    Vec col(std::size_t j) const;
    void set_col(std::size_t j, const Vec& v);
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(const Matrix& a, const Matrix& b);
Vec operator*(const Matrix& a, const Vec& x);

double norm_inf(const Matrix& m);  // max row sum
double max_abs(const Matrix& m);
double asymmetry(const Matrix& m);  // max |m - m^T|

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
Vec axpy(double a, const Vec& x, Vec y);  // a*x + y
Vec scaled(const Vec& x, double s);
double max_abs_diff(const Vec& x, const Vec& y);

// 2x2 real matrix.
struct Matrix2 {
    double m11 = 1, m12 = 0, m21 = 0, m22 = 1;

    static Matrix2 identity() { return {1, 0, 0, 1}; }
    double det() const { return m11 * m22 - m12 * m21; }
    double trace() const { return m11 + m22; }
    Matrix2 transpose() const { return {m11, m21, m12, m22}; }
};

Matrix2 operator*(const Matrix2& a, const Matrix2& b);
Matrix2 operator+(const Matrix2& a, const Matrix2& b);
Matrix2 operator-(const Matrix2& a, const Matrix2& b);
Matrix2 operator*(double s, const Matrix2& a);
double max_abs_diff(const Matrix2& a, const Matrix2& b);

// LU with partial pivoting; elimination is restricted to the band of the input.
class Lu {
public:
    explicit Lu(const Matrix& m);
    Vec solve(Vec rhs) const;
    Matrix solve(const Matrix& rhs) const;
    double det() const;
    std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_ = 0, kl_ = 0, ku_ = 0;
    Matrix lu_;
    std::vector<std::size_t> piv_;
    int sign_ = 1;
};

Vec solve(const Matrix& m, const Vec& rhs);
Matrix solve(const Matrix& m, const Matrix& rhs);
Matrix inverse(const Matrix& m);
double determinant(const Matrix& m);

struct SymEigen {
    Vec values;     // ascending
    Matrix vectors; // columns
};

// Cyclic Jacobi rotations.
SymEigen sym_eigen(const Matrix& m);

// D = G G^T, G lower triangular with positive diagonal.
Matrix lower_cholesky_like(const Matrix& d);

Matrix upper_triangular_inverse(const Matrix& u);

double bisect_root(const std::function<double(double)>& f, double lo, double hi);

}  // namespace gmpflow::nk
