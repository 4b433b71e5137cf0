#pragma once

#include <cmath>
#include <cstddef>

#include "orbitshift/matrix.hpp"

namespace orbitshift {

inline constexpr std::size_t matrix_exp_max_dim = 16;

// e^{tM} by scaling and squaring around a truncated Taylor series.  The
// generator is scaled to norm <= 1/2, the series is summed until terms fall
// below machine noise, and the result is squared back up.
inline matrix matrix_exp(const matrix& m, double t) {
    if (!m.square()) throw dimension_error("matrix_exp: matrix must be square");
    const std::size_t n = m.rows();
    if (n > matrix_exp_max_dim)
        throw dimension_error("matrix_exp: dimension exceeds cap of 16");

    matrix s = t * m;
    int squarings = 0;
    for (double nrm = frobenius_norm(s); nrm > 0.5; nrm *= 0.5) ++squarings;
    if (squarings > 0) s = std::ldexp(1.0, -squarings) * s;

    matrix result = matrix::identity(n);
    matrix term = matrix::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = (1.0 / k) * (term * s);
        result = result + term;
        if (frobenius_norm(term) <= 1e-20 * frobenius_norm(result)) break;
    }
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

}  // namespace orbitshift
