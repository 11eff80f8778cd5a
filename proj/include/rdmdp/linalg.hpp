#pragma once

#include "rdmdp/core.hpp"

#include <algorithm>
#include <cmath>

namespace rdmdp::detail {

/// Solves A x = b in place by LU with partial pivoting. A is n x n row-major.
/// The systems here are (I - gamma * P) with gamma < 1 and P row-stochastic,
/// which are strictly diagonally dominant, so breakdown indicates bad input.
inline numvec solve_dense(Matrix a, numvec b) {
    const int n = a.rows();
    if (a.cols() != n || static_cast<int>(b.size()) != n)
        throw dimension_error("solve_dense: non-square system or rhs mismatch");

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        real_t best = std::abs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            const real_t v = std::abs(a(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) throw invariant_error("solve_dense: singular system");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < n; ++r) {
            const real_t f = a(r, col) / a(col, col);
            a(r, col) = 0.0;
            if (f == 0.0) continue;
            for (int c = col + 1; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }

    numvec x(n);
    for (int r = n - 1; r >= 0; --r) {
        real_t acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a(r, c) * x[c];
        x[r] = acc / a(r, r);
    }
    return x;
}

} // namespace rdmdp::detail
