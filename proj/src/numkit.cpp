#include "gmpflow/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gmpflow::nk {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const Vec& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Vec Matrix::col(std::size_t j) const {
    Vec v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

void Matrix::set_col(std::size_t j, const Vec& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : a_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vec operator*(const Matrix& a, const Vec& x) {
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

double norm_inf(const Matrix& m) {
    double r = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
        r = std::max(r, s);
    }
    return r;
}

double max_abs(const Matrix& m) {
    double r = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j)));
    return r;
}

double asymmetry(const Matrix& m) {
    double r = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j) - m(j, i)));
    return r;
}

double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

Vec axpy(double a, const Vec& x, Vec y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
    return y;
}

Vec scaled(const Vec& x, double s) {
    Vec y(x);
    for (double& v : y) v *= s;
    return y;
}

double max_abs_diff(const Vec& x, const Vec& y) {
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(x[i] - y[i]));
    return r;
}

Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
}

Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
}

Matrix2 operator*(double s, const Matrix2& a) { return {s * a.m11, s * a.m12, s * a.m21, s * a.m22}; }

double max_abs_diff(const Matrix2& a, const Matrix2& b) {
    return std::max({std::abs(a.m11 - b.m11), std::abs(a.m12 - b.m12), std::abs(a.m21 - b.m21),
                     std::abs(a.m22 - b.m22)});
}

// ---------------------------------------------------------------- LU

Lu::Lu(const Matrix& m) : n_(m.rows()), lu_(m), piv_(m.rows()) {
    if (m.rows() != m.cols()) throw ValidationError("solve: matrix is not square");
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            if (m(i, j) != 0.0) {
                if (i > j) kl_ = std::max(kl_, i - j);
                else ku_ = std::max(ku_, j - i);
            }
    const double scale = norm_inf(m);
    const double tiny = 1e-13 * (scale > 0 ? scale : 1.0);
    const std::size_t uw = kl_ + ku_;
    for (std::size_t k = 0; k < n_; ++k) {
        const std::size_t rlast = std::min(n_ - 1, k + kl_);
        const std::size_t clast = std::min(n_ - 1, k + uw);
        std::size_t p = k;
        for (std::size_t i = k + 1; i <= rlast; ++i)
            if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
        piv_[k] = p;
        if (std::abs(lu_(p, k)) <= tiny) throw SingularMatrixError(k);
        if (p != k) {
            for (std::size_t j = k; j <= clast; ++j) std::swap(lu_(k, j), lu_(p, j));
            sign_ = -sign_;
        }
        const double inv = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i <= rlast; ++i) {
            const double l = lu_(i, k) * inv;
            lu_(i, k) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j <= clast; ++j) lu_(i, j) -= l * lu_(k, j);
        }
    }
}

Vec Lu::solve(Vec b) const {
    if (b.size() != n_) throw ValidationError("solve: rhs size mismatch");
    for (std::size_t k = 0; k < n_; ++k) {
        if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
        const std::size_t rlast = std::min(n_ - 1, k + kl_);
        for (std::size_t i = k + 1; i <= rlast; ++i) b[i] -= lu_(i, k) * b[k];
    }
    const std::size_t uw = kl_ + ku_;
    for (std::size_t kk = n_; kk-- > 0;) {
        const std::size_t clast = std::min(n_ - 1, kk + uw);
        double s = b[kk];
        for (std::size_t j = kk + 1; j <= clast; ++j) s -= lu_(kk, j) * b[j];
        b[kk] = s / lu_(kk, kk);
    }
    return b;
}

Matrix Lu::solve(const Matrix& rhs) const {
    Matrix x(rhs.rows(), rhs.cols());
    for (std::size_t j = 0; j < rhs.cols(); ++j) x.set_col(j, solve(rhs.col(j)));
    return x;
}

double Lu::det() const {
    double d = sign_;
    for (std::size_t i = 0; i < n_; ++i) d *= lu_(i, i);
    return d;
}

Vec solve(const Matrix& m, const Vec& rhs) { return Lu(m).solve(rhs); }
Matrix solve(const Matrix& m, const Matrix& rhs) { return Lu(m).solve(rhs); }
Matrix inverse(const Matrix& m) { return Lu(m).solve(Matrix::identity(m.rows())); }

double determinant(const Matrix& m) {
    try {
        return Lu(m).det();
    } catch (const SingularMatrixError&) {
        return 0.0;
    }
}

// ---------------------------------------------------------------- eigen

SymEigen sym_eigen(const Matrix& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw ValidationError("sym_eigen: matrix is not square");
    const double scale = std::max(1.0, max_abs(m));
    if (asymmetry(m) > 1e-12 * scale) throw NotSymmetricError();
    Matrix a(m);
    Matrix v = Matrix::identity(n);
    double fro = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) fro += a(i, j) * a(i, j);
    fro = std::sqrt(fro);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= 1e-17 * fro || off == 0.0) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymEigen r{Vec(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        r.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
    }
    return r;
}

// ---------------------------------------------------------------- triangular

Matrix lower_cholesky_like(const Matrix& d) {
    const std::size_t n = d.rows();
    if (d.cols() != n) throw ValidationError("cholesky: matrix is not square");
    if (asymmetry(d) > 1e-12 * std::max(1.0, max_abs(d))) throw NotSymmetricError();
    Matrix g(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = d(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= g(j, k) * g(j, k);
        if (!(s > 0.0)) throw NotPositiveDefiniteError(j);
        g(j, j) = std::sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = d(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= g(i, k) * g(j, k);
            g(i, j) = t / g(j, j);
        }
    }
    return g;
}

Matrix upper_triangular_inverse(const Matrix& u) {
    const std::size_t n = u.rows();
    Matrix x(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        if (u(j, j) == 0.0) throw SingularMatrixError(j);
        x(j, j) = 1.0 / u(j, j);
        for (std::size_t ii = j; ii-- > 0;) {
            double s = 0.0;
            for (std::size_t k = ii + 1; k <= j; ++k) s += u(ii, k) * x(k, j);
            x(ii, j) = -s / u(ii, ii);
        }
    }
    return x;
}

// ---------------------------------------------------------------- roots

double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!std::isfinite(flo) || !std::isfinite(fhi) || (flo > 0) == (fhi > 0)) throw NoSignChangeError();
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace gmpflow::nk
