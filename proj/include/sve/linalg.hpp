#pragma once

#include <vector>

namespace sve {

// Small dense row-major square matrix; sized for covariance blocks (n <= ~10).
struct Matrix {
    int n = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(int size) : n(size), a(static_cast<size_t>(size) * size, 0.0) {}

    double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

// Lower-triangular Cholesky factor of a symmetric PSD matrix. A pivot is
// rejected when it falls below pivot_tol times the matrix's own diagonal
// entry (relative test: covariance entries here span many orders of
// magnitude).
struct CholeskyResult {
    bool ok = false;
    int failed_index = -1;  // first rejected pivot, -1 if ok
    Matrix L;
    double min_pivot_ratio = 0.0;  // min over i of pivot_i / a_ii
};
CholeskyResult cholesky(const Matrix& a, double pivot_tol = 1e-12);

// Solves A x = b given the Cholesky factor of A.
std::vector<double> cholesky_solve(const CholeskyResult& factor,
                                   const std::vector<double>& b);

// Cheap condition estimate from the factor: (max_i L_ii / min_i L_ii)^2.
double cholesky_condition_estimate(const CholeskyResult& factor);

}  // namespace sve
