#pragma once

#include <functional>

namespace sve {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_intervals = 4000;
    // When true, failure to converge throws QuadratureError instead of
    // returning converged = false.
    bool throw_on_failure = true;
};

// Adaptive Gauss-Kronrod (G7,K15) integration of f on [a, b].
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts = {});

// Integrates f on [0, b] where f(s) ~ c * s^p as s -> 0 with p > -1.
// Substitutes s = v^(1/(p+1)) to remove the power singularity; residual
// logarithmic factors are absorbed by the adaptive refinement.
QuadratureResult integrate_power_singular(const std::function<double(double)>& f,
                                          double p, double b,
                                          const QuadratureOptions& opts = {});

}  // namespace sve
