#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sve/kernels.hpp"

namespace sve {

// Strictly uniform time grid: node k sits at k * h, h = T / N.
struct Grid {
    double T = 1.0;
    int N = 1;
    double h() const { return T / N; }
    double node(int k) const { return k * h(); }
    void validate() const;
};

// Exact panel moments of a kernel on the uniform grid, indexed by lag
// d = 1..N:
//   M0[d] = integral of K(v)            over [(d-1)h, dh]
//   M1[d] = integral of K(v) (dh - v)/h over [(d-1)h, dh]
// Closed forms when the kernel kind admits them, panel quadrature otherwise.
struct KernelMoments {
    std::vector<double> M0, M1;  // index 0 unused
};
KernelMoments kernel_lag_moments(const KernelSpec& kernel, const Grid& grid);

// Solution of u = f + beta * K * u (convolution) by product integration:
// piecewise-linear collocation with exact kernel moments; the unknown is
// represented at nodes 1..N only (node 0 excluded: u may be singular there),
// with the first panel treated as constant u_1.
struct ValueTable {
    Grid grid;
    std::vector<double> values;  // index k = node k; values[0] is NaN
    double residual = 0.0;       // max discrete-equation residual (resubstitution)
};
ValueTable solve_linear_volterra(const KernelSpec& kernel, double beta,
                                 const std::function<double(double)>& forcing,
                                 const Grid& grid);

// Resolvent bundle of the kernel: EK solves EK = K + beta K * EK, RK is
// -beta EK, E1 is the drift multiplier 1 + beta int_0^t e^(lambda s) EK ds,
// E1bar = e^(-lambda t) E1.
//
// For kernels unbounded at 0 the solver works on the subtracted unknown
// w = EK - K (continuous, w(0) = 0), which restores the product-integration
// order that direct collocation loses at the singularity; EK = K + w.
struct ResolventTable {
    Grid grid;
    KernelSpec kernel;
    double beta = 0.0;
    double lambda = 0.0;
    std::vector<double> EK, RK;       // nodes 0..N; [0] is NaN (may be singular)
    std::vector<double> w;            // EK - K at nodes 0..N; w[0] = 0
    std::vector<double> E1, E1bar;    // nodes 0..N; E1[0] = 1
    std::vector<double> cumEK;        // int_0^{t_k} EK ds, nodes 0..N
    double residual = 0.0;

    // Piecewise interpolants (t in [0, T]; EK_at requires t > 0).
    double EK_at(double t) const;
    double E1_at(double t) const;
    double cumEK_at(double t) const;
};
ResolventTable resolvent_table(const KernelSpec& kernel, double beta,
                               double lambda, const Grid& grid);

// Resolvent of Kbar = -sigma0^2 K^2: R solves R = Kbar - Kbar * R.
// R <= 0 is enforced as a post-check (sign_ok / max_sign_violation).
struct SquaredResolventTable {
    Grid grid;
    KernelSpec kernel;
    double sigma0 = 0.0;
    std::vector<double> R;     // nodes 0..N; [0] is NaN (may be singular)
    std::vector<double> wbar;  // R - Kbar at nodes 0..N; wbar[0] = 0
    double residual = 0.0;
    bool sign_ok = true;
    double max_sign_violation = 0.0;

    // Cumulative integral of e^(2 lambda s) R(s) over [0, t_k], nodes 0..N.
    // The Kbar part of R is integrated by panel quadrature (singularity-
    // aware on the first panel), the continuous remainder by trapezoid.
    std::vector<double> cum_exp_weighted(double lambda) const;
};
SquaredResolventTable resolvent_squared_kernel(const KernelSpec& kernel,
                                               double sigma0, const Grid& grid);

// Max residual accepted as "solving" the discrete equation.
inline constexpr double kSolverDeclaredTolerance = 1e-8;

// CSV export with columns t, EK, RK, E1, E1bar (nodes 1..N).
void write_resolvent_csv(const ResolventTable& table, const std::string& path);

}  // namespace sve
