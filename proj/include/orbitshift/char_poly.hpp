#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "orbitshift/matrix.hpp"

namespace orbitshift {

inline constexpr std::size_t char_poly_max_dim = 64;

// Coefficients c_0..c_n of the polynomial sum_k c_k lambda^k.
struct poly_coeffs {
    std::vector<double> coeffs;

    std::size_t degree() const { return coeffs.size() - 1; }
    double operator[](std::size_t k) const { return coeffs[k]; }
};

// Characteristic polynomial |M - lambda E| via the Faddeev-LeVerrier
// recurrence.  Convention: the leading coefficient is (-1)^n exactly and the
// constant term equals det(M) up to the rounding of the recurrence.
inline poly_coeffs char_poly(const matrix& m) {
    if (!m.square()) throw dimension_error("char_poly: matrix must be square");
    const std::size_t n = m.rows();
    if (n > char_poly_max_dim)
        throw dimension_error("char_poly: dimension exceeds cap of 64");

    // Recurrence for the monic polynomial det(lambda E - M):
    //   lambda^n + a_{n-1} lambda^{n-1} + ... + a_0
    std::vector<double> a(n + 1, 0.0);
    a[n] = 1.0;
    matrix aux = matrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        matrix am = m * aux;
        a[n - k] = -trace(am) / static_cast<double>(k);
        if (k < n) {
            for (std::size_t i = 0; i < n; ++i) am(i, i) += a[n - k];
            aux = std::move(am);
        }
    }

    // |M - lambda E| = (-1)^n det(lambda E - M)
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    poly_coeffs out;
    out.coeffs.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out.coeffs[k] = sign * a[k];
    return out;
}

inline double eval_poly(const poly_coeffs& p, double lambda) {
    double v = 0.0;
    for (std::size_t k = p.coeffs.size(); k-- > 0;) v = v * lambda + p.coeffs[k];
    return v;
}

// Residual of the rectangular product identity
//     chi_{A B^T}(lambda) = (-lambda)^{m-n} chi_{A^T B}(lambda)
// for A, B of shape m x n with m >= n (roles transpose when m < n).
// Returns the largest coefficientwise difference after aligning degrees.
inline double verify_product_char_identity(const matrix& a, const matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw dimension_error("verify_product_char_identity: shapes differ");
    if (a.rows() < a.cols())
        return verify_product_char_identity(transpose(a), transpose(b));

    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const poly_coeffs big = char_poly(a * transpose(b));    // degree m
    const poly_coeffs small = char_poly(transpose(a) * b);  // degree n

    // (-lambda)^{m-n} chi_{A^T B}: shift coefficients up by m-n with sign.
    const double sign = ((m - n) % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> lifted(m + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) lifted[k + (m - n)] = sign * small.coeffs[k];

    double residual = 0.0;
    for (std::size_t k = 0; k <= m; ++k)
        residual = std::max(residual, std::abs(big.coeffs[k] - lifted[k]));
    return residual;
}

}  // namespace orbitshift
