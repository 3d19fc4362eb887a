#pragma once

#include <span>
#include <vector>

namespace pricemfg {

// Thomas algorithm for a*x_{i-1} + b*x_i + c*x_{i+1} = d. Overwrites d with x.
// Scratch vectors are caller-provided so inner loops do not allocate.
inline void solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                              std::span<const double> c, std::span<double> d,
                              std::vector<double>& scratch) {
    const int n = (int)d.size();
    scratch.resize(n);
    double beta = b[0];
    d[0] /= beta;
    for (int i = 1; i < n; ++i) {
        scratch[i] = c[i - 1] / beta;
        beta = b[i] - a[i] * scratch[i];
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for (int i = n - 2; i >= 0; --i) d[i] -= scratch[i + 1] * d[i + 1];
}

}  // namespace pricemfg
