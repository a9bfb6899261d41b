#pragma once

#include <span>
#include <string>
#include <vector>

namespace sve {

enum class KernelKind {
    Exponential,     // c * exp(-rate * t)
    Fractional,      // scale * t^(H - 1/2)
    GammaFractional, // scale * t^(H - 1/2) * exp(-damping * t)
    LogModulated,    // t^(H - 1/2) / Gamma(H + 1/2) * log(1 + 1/t)
    Constant,        // c
    Tabulated        // piecewise-linear interpolation of (t_i, v_i)
};

struct KernelSpec {
    KernelKind kind = KernelKind::Constant;
    double c = 1.0;        // Exponential / Constant
    double rate = 0.0;     // Exponential
    double H = 0.5;        // fractional family
    double scale = 1.0;    // fractional family
    double damping = 0.0;  // GammaFractional
    std::vector<double> table_t, table_v;  // Tabulated

    bool has_closed_antiderivative() const;
    bool has_closed_square_integral() const;
    // True when the kernel is unbounded at t = 0 (value undefined there).
    bool singular_at_zero() const;
    std::string id() const;

    static KernelSpec exponential(double c, double rate);
    static KernelSpec fractional(double H, double scale = 1.0);
    static KernelSpec gamma_fractional(double H, double damping, double scale = 1.0);
    static KernelSpec log_modulated(double H);
    static KernelSpec constant(double c);
    static KernelSpec tabulated(std::vector<double> t, std::vector<double> v);
    // (1/t) e^(-1/(2t)) sampled on a dense grid of [0, t_max]: continuous,
    // vanishing at 0 faster than any power, with integral of K^2 on [0, t]
    // equal to e^(-1/t) in closed form -- the canonical example violating
    // every power-law lower bound.
    static KernelSpec exotic_exponential_decay(double t_max = 1.5, int n_points = 3001);
};

// K(t). Throws std::domain_error for t < 0, for t = 0 when the kernel is
// unbounded there, and outside the range of a tabulated kernel.
double kernel_eval(const KernelSpec& kernel, double t);

// Integral of K over [a, b], 0 <= a <= b. Closed form when available,
// otherwise adaptive quadrature with singularity handling at a = 0.
double kernel_integrate(const KernelSpec& kernel, double a, double b);

// Integral of K^2 over [0, t].
double kernel_integrate_sq(const KernelSpec& kernel, double t);

// lambda(n) = 1 / integral of K^2 over [0, 1/n].
double lambda_n(const KernelSpec& kernel, long n);

// Small-time limit kernel: Fractional(H, sqrt(2H)) for the fractional
// family and log-modulated kinds, Constant(1) for kernels continuous and
// nonzero at 0. Throws UnsupportedKindError for Tabulated.
KernelSpec limit_kernel(const KernelSpec& kernel);

struct SmallTimeBounds {
    double gamma = 0.0;
    double gamma_star = 0.0;  // >= gamma
    double C = 0.0;
    double C_star = 0.0;
};

struct BoundsViolation {
    double t;
    double value;   // integral of K^2 over [0, t]
    double lower;   // C_star * t^(2 gamma_star)
    double upper;   // C * t^(2 gamma)
};

struct BoundsReport {
    bool ok = false;
    std::vector<BoundsViolation> violations;
};

// Checks C_star * t^(2 gamma_star) <= int_0^t K^2 <= C * t^(2 gamma) at
// every grid point (grid within (0, 1]).
BoundsReport check_small_time_bounds(const KernelSpec& kernel,
                                     const SmallTimeBounds& bounds,
                                     std::span<const double> grid);

// The exponent corridor gamma_star < min(gamma + 1/2, gamma (1 + chi_sigma))
// from user-declared diffusion Hoelder metadata.
bool corridor_ok(const SmallTimeBounds& bounds, double chi_sigma);

}  // namespace sve
