#include "sve/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sve {

CholeskyResult cholesky(const Matrix& a, double pivot_tol) {
    const int n = a.n;
    CholeskyResult r;
    r.L = Matrix(n);
    r.ok = true;
    r.min_pivot_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a.at(i, j);
            for (int k = 0; k < j; ++k) s -= r.L.at(i, k) * r.L.at(j, k);
            if (i == j) {
                const double diag = a.at(i, i);
                const double ratio = diag > 0.0 ? s / diag : -1.0;
                r.min_pivot_ratio = std::min(r.min_pivot_ratio, ratio);
                if (!(s > pivot_tol * diag)) {
                    r.ok = false;
                    r.failed_index = i;
                    return r;
                }
                r.L.at(i, i) = std::sqrt(s);
            } else {
                r.L.at(i, j) = s / r.L.at(j, j);
            }
        }
    }
    return r;
}

std::vector<double> cholesky_solve(const CholeskyResult& factor,
                                   const std::vector<double>& b) {
    if (!factor.ok) throw std::invalid_argument("cholesky_solve: factorization failed");
    const int n = factor.L.n;
    if (static_cast<int>(b.size()) != n) {
        throw std::invalid_argument("cholesky_solve: dimension mismatch");
    }
    std::vector<double> y(b);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) y[i] -= factor.L.at(i, k) * y[k];
        y[i] /= factor.L.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) y[i] -= factor.L.at(k, i) * y[k];
        y[i] /= factor.L.at(i, i);
    }
    return y;
}

double cholesky_condition_estimate(const CholeskyResult& factor) {
    if (!factor.ok || factor.L.n == 0) {
        return std::numeric_limits<double>::infinity();
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < factor.L.n; ++i) {
        lo = std::min(lo, factor.L.at(i, i));
        hi = std::max(hi, factor.L.at(i, i));
    }
    const double q = hi / lo;
    return q * q;
}

}  // namespace sve
