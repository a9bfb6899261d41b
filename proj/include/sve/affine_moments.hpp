#pragma once

#include <string>
#include <vector>

#include "sve/kernels.hpp"
#include "sve/volterra.hpp"

namespace sve {

enum class DiffusionKind { ConstantVol, SqrtVol, LinearVol, Jacobi };
enum class StateSpace { AllReals, NonnegativeReals, Interval };

// Affine model: drift b(y) = b0 + beta * y, initial curve x * e^(-lambda t),
// diffusion per kind (sigma0 for the first three, [alpha1, alpha2] for Jacobi).
struct ModelSpec {
    double x = 0.0;
    double lambda = 0.0;
    double b0 = 0.0;
    double beta = 0.0;
    DiffusionKind diffusion = DiffusionKind::ConstantVol;
    double sigma0 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    StateSpace state_space = StateSpace::AllReals;
    // Holder exponents of drift/diffusion, metadata consumed by the kernel
    // corridor check only.
    double chi_b = 1.0;
    double chi_sigma = 0.5;

    // Throws std::invalid_argument on an inconsistent specification.
    void validate() const;

    double sigma_at(double y) const;  // diffusion coefficient at state y
};

struct DefectReport {
    double t = 0.0;
    double T = 0.0;
    double defect = 0.0;
    double tolerance = 0.0;
    bool consistent() const;  // |defect| <= tolerance
    std::string verdict() const;
};

// Default tolerances, matched to each pipeline's dominant numerical error.
inline constexpr double kFirstMomentTolerance = 1e-6;
inline constexpr double kSqrtSecondMomentTolerance = 1e-8;
inline constexpr double kLinearSecondMomentTolerance = 1e-4;

// E_x[X_T] = e^(-lambda T) E1(T) x + b0 * int_0^T EK.
// For beta = 0 this reduces to x e^(-lambda T) + b0 * int_0^T K and is
// evaluated in closed form (no table).
double first_moment(const ModelSpec& model, const KernelSpec& kernel, double T,
                    const Grid& grid);
double first_moment(const ModelSpec& model, const ResolventTable& table, double T);

// Flow defect of the first-moment formula: the direct value at horizon T
// minus the value obtained by restarting the formula at time t from the
// time-t state. Vanishes for all (t, T) iff K(t) = c e^(-lambda t).
DefectReport first_moment_flow_defect(const ModelSpec& model,
                                      const KernelSpec& kernel, double t, double T,
                                      const Grid& grid);
DefectReport first_moment_flow_defect(const ModelSpec& model,
                                      const ResolventTable& table, double t,
                                      double T);

// Square-root diffusion, zero drift: E_x[X_T^2] =
//   x^2 e^(-2 lambda T) + x sigma0^2 int_0^T e^(-lambda (T-s)) K(s)^2 ds.
double second_moment_sqrt(const ModelSpec& model, const KernelSpec& kernel,
                          double T);

// Flow defect of the square-root second-moment identity, drift-free part:
//   A_lam(T) - e^(-2 lambda (T-t)) A_lam(t) - A_lam(T-t)
// with A_lam(tau) = int_0^tau e^(-lambda (tau-s)) K(s)^2 ds ... evaluated in
// the common e^(-lambda T)-weighted form. Vanishes iff K(t) = c e^(-lambda t).
DefectReport second_moment_sqrt_defect(const KernelSpec& kernel, double lambda,
                                       double t, double T);

// Square-root diffusion with affine drift (general case):
//   E_x[X_T^2] = m(T)^2 + sigma0^2 int_0^T EK(T-u)^2 m(u) du,
// m(u) = E_x[X_u] from the first-moment formula. Requires m >= 0 on [0, T]
// for the state to stay nonnegative in expectation.
double second_moment_sqrt_drifted(const ModelSpec& model,
                                  const ResolventTable& table, double T);

// Linear diffusion, zero drift: E_x[X_T^2] =
//   x^2 e^(-2 lambda T) (1 - int_0^T e^(2 lambda s) R(s) ds)
// with R the resolvent of Kbar = -sigma0^2 K^2.
double second_moment_linear(const ModelSpec& model, const KernelSpec& kernel,
                            double T, const Grid& grid);

// Flow defect of the linear-diffusion identity, with C(tau) =
// int_0^tau e^(2 lambda s) R(s) ds:
//   defect = [C(T) - C(T-t)] - C(t) (1 - C(T-t)).
DefectReport second_moment_linear_defect(const KernelSpec& kernel, double lambda,
                                         double sigma0, double t, double T,
                                         const Grid& grid);
DefectReport second_moment_linear_defect(const SquaredResolventTable& table,
                                         double lambda, double t, double T);
// Sweep-friendly variant: pass the precomputed cum_exp_weighted vector so one
// table serves many (t, T) pairs.
DefectReport second_moment_linear_defect(const std::vector<double>& cum,
                                         const Grid& grid, double t, double T);

// Least-deviation test of K against c e^(-lambda t) anchored at the first
// grid node: ok iff sup over nodes of |K(t) - K(t1) e^(-lambda (t - t1))|
// is at most tol.
struct ExpFitReport {
    bool ok = false;
    double sup_deviation = 0.0;
    double c_fit = 0.0;  // implied c = K(t1) e^(lambda t1)
};
ExpFitReport exponential_fit_test(const KernelSpec& kernel, double lambda,
                                  const Grid& grid, double tol);

// CSV export of a defect batch: kernel id, lambda, b0, beta, t, T, defect,
// verdict.
struct DefectRow {
    std::string kernel_id;
    double lambda = 0.0;
    double b0 = 0.0;
    double beta = 0.0;
    DefectReport report;
};
void write_defect_rows_csv(const std::vector<DefectRow>& rows,
                           const std::string& path);

}  // namespace sve
