#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "orbitshift/matrix.hpp"

namespace orbitshift {

// Two tuples of n vectors in R^m: fields F_1..F_n and covector-like
// companions A_1..A_n (gradients, in the shift-map use).
struct vector_pair {
    std::vector<vec> f_vectors;
    std::vector<vec> a_vectors;
};

struct d_symbol_result {
    double value;           // |E_n + Y|
    double cross_residual;  // | |E_m + X| - |E_n + Y| |
};

namespace detail {

inline void validate_pair(const vector_pair& p, std::size_t& n, std::size_t& m) {
    n = p.f_vectors.size();
    if (n == 0 || p.a_vectors.size() != n)
        throw dimension_error("d_symbol: tuples must be non-empty and equally long");
    m = p.f_vectors[0].size();
    if (m == 0) throw dimension_error("d_symbol: vectors must be non-empty");
    for (std::size_t i = 0; i < n; ++i)
        if (p.f_vectors[i].size() != m || p.a_vectors[i].size() != m)
            throw dimension_error("d_symbol: all vectors must share one dimension");
}

}  // namespace detail

// D-symbol of the pair: the determinant |E_m + X| with X = sum_i F_i A_i^T,
// equal to |E_n + Y| with Y_ij = <F_j, A_i> (rows indexed by the A-tuple,
// columns by the F-tuple; transposing Y leaves the determinant unchanged, so
// the orientation is only a storage convention).  Both forms are computed;
// the n x n value is returned together with the cross-form residual.
inline d_symbol_result d_symbol(const vector_pair& p) {
    std::size_t n = 0, m = 0;
    detail::validate_pair(p, n, m);

    matrix em(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i) em(i, i) = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c)
                em(r, c) += p.f_vectors[i][r] * p.a_vectors[i][c];

    matrix en(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            en(i, j) = dot(p.f_vectors[j], p.a_vectors[i]);
        en(i, i) += 1.0;
    }

    const double value_m = det(em);
    const double value_n = det(en);
    return {value_n, std::abs(value_m - value_n)};
}

// Gram determinant |Y| of a single tuple (F_i = A_i = vectors[i]).
// Non-negative up to roundoff.
inline double gram_det(const std::vector<vec>& vectors) {
    const std::size_t n = vectors.size();
    if (n == 0) throw dimension_error("gram_det: empty tuple");
    const std::size_t m = vectors[0].size();
    for (const vec& v : vectors)
        if (v.size() != m)
            throw dimension_error("gram_det: vectors must share one dimension");

    matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = dot(vectors[i], vectors[j]);
    return det(g);
}

}  // namespace orbitshift
