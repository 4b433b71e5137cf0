#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "orbitshift/errors.hpp"

namespace orbitshift {

using vec = std::vector<double>;

inline double dot(const vec& a, const vec& b) {
    if (a.size() != b.size())
        throw dimension_error("dot: operand sizes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const vec& a) { return std::sqrt(dot(a, a)); }

inline vec unit_vector(std::size_t dim, std::size_t index) {
    if (index >= dim)
        throw dimension_error("unit_vector: index out of range");
    vec e(dim, 0.0);
    e[index] = 1.0;
    return e;
}

// Dense real matrix, row-major storage.
class matrix {
public:
    matrix() = default;

    matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0)
            throw dimension_error("matrix: dimensions must be positive");
    }

    matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        if (rows_ == 0) throw dimension_error("matrix: empty row list");
        cols_ = rows.begin()->size();
        if (cols_ == 0) throw dimension_error("matrix: empty row");
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw dimension_error("matrix: ragged row list");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static matrix identity(std::size_t n) {
        matrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    vec row(std::size_t i) const {
        vec r(cols_);
        for (std::size_t j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
        return r;
    }

    vec col(std::size_t j) const {
        vec c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline matrix operator+(const matrix& a, const matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw dimension_error("matrix addition: shapes differ");
    matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
    return c;
}

inline matrix operator-(const matrix& a, const matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw dimension_error("matrix subtraction: shapes differ");
    matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
    return c;
}

inline matrix operator*(double s, const matrix& a) {
    matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
    return c;
}

inline matrix operator*(const matrix& a, const matrix& b) {
    if (a.cols() != b.rows())
        throw dimension_error("matrix product: inner dimensions differ");
    matrix c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline vec operator*(const matrix& a, const vec& x) {
    if (a.cols() != x.size())
        throw dimension_error("matrix-vector product: sizes differ");
    vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

inline matrix transpose(const matrix& a) {
    matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// Outer product u v^T.
inline matrix outer(const vec& u, const vec& v) {
    matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

inline double trace(const matrix& a) {
    if (!a.square()) throw dimension_error("trace: matrix must be square");
    double t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

inline double frobenius_norm(const matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

namespace detail {

inline bool upper_triangular(const matrix& a) {
    for (std::size_t i = 1; i < a.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (a(i, j) != 0.0) return false;
    return true;
}

inline bool lower_triangular(const matrix& a) {
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (a(i, j) != 0.0) return false;
    return true;
}

}  // namespace detail

// Determinant by LU factorization with partial pivoting.  Triangular inputs
// short-circuit to the diagonal product, which keeps them exact (pivot swaps
// would otherwise introduce rounding on lower-triangular inputs).
inline double det(const matrix& a) {
    if (!a.square()) throw dimension_error("det: matrix must be square");
    const std::size_t n = a.rows();

    if (detail::upper_triangular(a) || detail::lower_triangular(a)) {
        double d = 1.0;
        for (std::size_t i = 0; i < n; ++i) d *= a(i, i);
        return d;
    }

    matrix lu = a;
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
        if (lu(pivot, k) == 0.0) return 0.0;
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double mult = lu(i, k) / lu(k, k);
            lu(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= mult * lu(k, j);
        }
    }
    double d = sign;
    for (std::size_t k = 0; k < n; ++k) d *= lu(k, k);
    return d;
}

}  // namespace orbitshift
