#pragma once

#include <utility>
#include <vector>

#include "cdop/prec.hpp"

namespace cdop::linalg {

// Dense determinant by Gaussian elimination with partial pivoting. Works for
// Real and Complex entries (pivot selection by absolute value). The matrix is
// consumed. Empty matrix yields 1 by convention.
template <typename T>
T det_pp(std::vector<std::vector<T>> m, mpfr_prec_t prec) {
    size_t n = m.size();
    if (n == 0) return T(Real(1L, prec));
    T det(Real(1L, prec));
    int sign = 1;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        Real best = abs(m[col][col]);
        for (size_t r = col + 1; r < n; ++r) {
            Real mag = abs(m[r][col]);
            if (mag > best) {
                best = mag;
                piv = r;
            }
        }
        if (best.is_zero()) return T(Real(0L, prec));
        if (piv != col) {
            std::swap(m[piv], m[col]);
            sign = -sign;
        }
        det = det * m[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            T f = m[r][col] / m[col][col];
            for (size_t c = col + 1; c < n; ++c) m[r][c] = m[r][c] - f * m[col][c];
        }
    }
    if (sign < 0) det = -det;
    return det;
}

}  // namespace cdop::linalg
