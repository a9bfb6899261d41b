#include "sve/volterra.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sve/errors.hpp"
#include "sve/io.hpp"
#include "sve/quadrature.hpp"
#include "sve/special_functions.hpp"

namespace sve {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Panel-friendly quadrature options: the defect pipelines need ~1e-8
// absolute accuracy; per-panel targets sit well below that.
QuadratureOptions panel_quad_opts() {
    QuadratureOptions o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-11;
    return o;
}

// ---------------------------------------------------------------------------
// Lag moments
// ---------------------------------------------------------------------------

// integral of v^(alpha-1) (B - v) dv over [A, B]
double power_first_weight(double alpha, double A, double B) {
    const double m0 = (std::pow(B, alpha) - std::pow(A, alpha)) / alpha;
    const double m1 = (std::pow(B, alpha + 1.0) - std::pow(A, alpha + 1.0)) / (alpha + 1.0);
    return B * m0 - m1;
}

// integral of e^(-r v) (B - v) dv over [A, B]
double exp_first_weight(double r, double A, double B) {
    if (r == 0.0) {
        const double w = B - A;
        return 0.5 * w * w;
    }
    const double ea = std::exp(-r * A), eb = std::exp(-r * B);
    return (B - A) * ea / r - (ea - eb) / (r * r);
}

// integral of v^(alpha-1) e^(-d v) dv over [A, B] via lower incomplete gamma
double gamma_kernel_mass(double alpha, double d, double A, double B) {
    if (d == 0.0) return (std::pow(B, alpha) - std::pow(A, alpha)) / alpha;
    const double gb = lower_incomplete_gamma(alpha, d * B);
    const double ga = A == 0.0 ? 0.0 : lower_incomplete_gamma(alpha, d * A);
    return std::pow(d, -alpha) * (gb - ga);
}

}  // namespace

void Grid::validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("Grid: requires T > 0");
    if (N < 1) throw std::invalid_argument("Grid: requires N >= 1");
}

KernelMoments kernel_lag_moments(const KernelSpec& kernel, const Grid& grid) {
    grid.validate();
    const int N = grid.N;
    const double h = grid.h();
    KernelMoments m;
    m.M0.assign(N + 1, 0.0);
    m.M1.assign(N + 1, 0.0);
    switch (kernel.kind) {
        case KernelKind::Constant:
            for (int d = 1; d <= N; ++d) {
                m.M0[d] = kernel.c * h;
                m.M1[d] = 0.5 * kernel.c * h;
            }
            break;
        case KernelKind::Exponential:
            for (int d = 1; d <= N; ++d) {
                const double A = (d - 1) * h, B = d * h;
                m.M0[d] = kernel_integrate(kernel, A, B);
                m.M1[d] = kernel.c * exp_first_weight(kernel.rate, A, B) / h;
            }
            break;
        case KernelKind::Fractional: {
            const double alpha = kernel.H + 0.5;
            for (int d = 1; d <= N; ++d) {
                const double A = (d - 1) * h, B = d * h;
                m.M0[d] = kernel.scale * (std::pow(B, alpha) - std::pow(A, alpha)) / alpha;
                m.M1[d] = kernel.scale * power_first_weight(alpha, A, B) / h;
            }
            break;
        }
        case KernelKind::GammaFractional: {
            const double alpha = kernel.H + 0.5;
            const double d0 = kernel.damping;
            for (int d = 1; d <= N; ++d) {
                const double A = (d - 1) * h, B = d * h;
                const double mass0 = gamma_kernel_mass(alpha, d0, A, B);
                const double mass1 = gamma_kernel_mass(alpha + 1.0, d0, A, B);
                m.M0[d] = kernel.scale * mass0;
                m.M1[d] = kernel.scale * (B * mass0 - mass1) / h;
            }
            break;
        }
        case KernelKind::Tabulated:
            for (int d = 1; d <= N; ++d) {
                const double A = (d - 1) * h, B = d * h;
                m.M0[d] = kernel_integrate(kernel, A, B);
                auto f = [&](double v) { return kernel_eval(kernel, v) * (B - v) / h; };
                m.M1[d] = integrate_adaptive(f, A, B, panel_quad_opts()).value;
            }
            break;
        case KernelKind::LogModulated: {
            const double p = kernel.H - 0.5;
            for (int d = 1; d <= N; ++d) {
                const double A = (d - 1) * h, B = d * h;
                auto f0 = [&](double v) { return kernel_eval(kernel, v); };
                auto f1 = [&](double v) { return kernel_eval(kernel, v) * (B - v) / h; };
                if (d == 1) {
                    m.M0[d] = integrate_power_singular(f0, p, B, panel_quad_opts()).value;
                    m.M1[d] = integrate_power_singular(f1, p, B, panel_quad_opts()).value;
                } else {
                    m.M0[d] = integrate_adaptive(f0, A, B, panel_quad_opts()).value;
                    m.M1[d] = integrate_adaptive(f1, A, B, panel_quad_opts()).value;
                }
            }
            break;
        }
    }
    return m;
}

namespace {

// ---------------------------------------------------------------------------
// Generalized convolution kernel: pointwise values, panel moments, and the
// self-convolution needed by the subtracted scheme. Covers both K itself and
// Kbar = -sigma0^2 K^2.
// ---------------------------------------------------------------------------
struct PanelKernel {
    KernelMoments moments;
    std::function<double(double)> eval;       // t > 0
    std::function<double(double)> conv_self;  // (k * k)(t), t > 0
    bool singular = false;
};

PanelKernel make_panel_kernel(const KernelSpec& kernel, const Grid& grid) {
    PanelKernel pk;
    pk.moments = kernel_lag_moments(kernel, grid);
    pk.eval = [kernel](double t) { return kernel_eval(kernel, t); };
    pk.singular = kernel.singular_at_zero();
    switch (kernel.kind) {
        case KernelKind::Fractional: {
            // (K*K)(t) = scale^2 B(alpha, alpha) t^(2 alpha - 1)
            const double alpha = kernel.H + 0.5;
            const double beta_aa =
                gamma_fn(alpha) * gamma_fn(alpha) / gamma_fn(2.0 * alpha);
            const double s2 = kernel.scale * kernel.scale;
            pk.conv_self = [=](double t) {
                return s2 * beta_aa * std::pow(t, 2.0 * alpha - 1.0);
            };
            break;
        }
        case KernelKind::GammaFractional: {
            // The damping factor factors out of the convolution exactly:
            // (K*K)(t) = scale^2 e^(-damping t) B(alpha, alpha) t^(2 alpha - 1)
            const double alpha = kernel.H + 0.5;
            const double beta_aa =
                gamma_fn(alpha) * gamma_fn(alpha) / gamma_fn(2.0 * alpha);
            const double s2 = kernel.scale * kernel.scale;
            const double d0 = kernel.damping;
            pk.conv_self = [=](double t) {
                return s2 * beta_aa * std::exp(-d0 * t) * std::pow(t, 2.0 * alpha - 1.0);
            };
            break;
        }
        default: {
            // Quadrature: split at t/2, each half carries one endpoint
            // singularity of order H - 1/2 (or none for regular kernels).
            const double p = kernel.singular_at_zero() ? kernel.H - 0.5 : 0.0;
            pk.conv_self = [kernel, p](double t) {
                auto half = [&](double s) {
                    return kernel_eval(kernel, s) * kernel_eval(kernel, t - s);
                };
                const double left =
                    integrate_power_singular(half, p, 0.5 * t, panel_quad_opts()).value;
                return 2.0 * left;  // integrand symmetric about t/2
            };
            break;
        }
    }
    return pk;
}

PanelKernel make_squared_panel_kernel(const KernelSpec& kernel, double sigma0,
                                      const Grid& grid) {
    grid.validate();
    const int N = grid.N;
    const double h = grid.h();
    const double s2 = sigma0 * sigma0;
    PanelKernel pk;
    pk.moments.M0.assign(N + 1, 0.0);
    pk.moments.M1.assign(N + 1, 0.0);
    pk.singular = kernel.singular_at_zero();
    pk.eval = [kernel, s2](double t) {
        const double k = kernel_eval(kernel, t);
        return -s2 * k * k;
    };

    // M0 via the exact square integral; M1 per kind.
    for (int d = 1; d <= N; ++d) {
        const double A = (d - 1) * h, B = d * h;
        pk.moments.M0[d] =
            -s2 * (kernel_integrate_sq(kernel, B) - kernel_integrate_sq(kernel, A));
        switch (kernel.kind) {
            case KernelKind::Constant:
                pk.moments.M1[d] = -s2 * kernel.c * kernel.c * 0.5 * h;
                break;
            case KernelKind::Exponential:
                pk.moments.M1[d] =
                    -s2 * kernel.c * kernel.c * exp_first_weight(2.0 * kernel.rate, A, B) / h;
                break;
            case KernelKind::Fractional:
                pk.moments.M1[d] = -s2 * kernel.scale * kernel.scale *
                                   power_first_weight(2.0 * kernel.H, A, B) / h;
                break;
            case KernelKind::GammaFractional: {
                const double twoH = 2.0 * kernel.H;
                const double d2 = 2.0 * kernel.damping;
                const double mass0 = gamma_kernel_mass(twoH, d2, A, B);
                const double mass1 = gamma_kernel_mass(twoH + 1.0, d2, A, B);
                pk.moments.M1[d] =
                    -s2 * kernel.scale * kernel.scale * (B * mass0 - mass1) / h;
                break;
            }
            default: {
                auto f1 = [&](double v) {
                    const double k = kernel_eval(kernel, v);
                    return -s2 * k * k * (B - v) / h;
                };
                if (d == 1 && pk.singular) {
                    pk.moments.M1[d] =
                        integrate_power_singular(f1, 2.0 * kernel.H - 1.0, B,
                                                 panel_quad_opts())
                            .value;
                } else {
                    pk.moments.M1[d] =
                        integrate_adaptive(f1, A, B, panel_quad_opts()).value;
                }
                break;
            }
        }
    }

    // (Kbar*Kbar)(t) = sigma0^4 (K^2 * K^2)(t)
    switch (kernel.kind) {
        case KernelKind::Fractional: {
            const double twoH = 2.0 * kernel.H;
            const double beta_hh = gamma_fn(twoH) * gamma_fn(twoH) / gamma_fn(2.0 * twoH);
            const double s4 = s2 * s2 * std::pow(kernel.scale, 4.0);
            pk.conv_self = [=](double t) {
                return s4 * beta_hh * std::pow(t, 2.0 * twoH - 1.0);
            };
            break;
        }
        case KernelKind::GammaFractional: {
            const double twoH = 2.0 * kernel.H;
            const double beta_hh = gamma_fn(twoH) * gamma_fn(twoH) / gamma_fn(2.0 * twoH);
            const double s4 = s2 * s2 * std::pow(kernel.scale, 4.0);
            const double d2 = 2.0 * kernel.damping;
            pk.conv_self = [=](double t) {
                return s4 * beta_hh * std::exp(-d2 * t) * std::pow(t, 2.0 * twoH - 1.0);
            };
            break;
        }
        default: {
            const double p = pk.singular ? 2.0 * kernel.H - 1.0 : 0.0;
            pk.conv_self = [kernel, s2, p](double t) {
                auto half = [&](double s) {
                    const double ka = kernel_eval(kernel, s);
                    const double kb = kernel_eval(kernel, t - s);
                    return (s2 * ka * ka) * (s2 * kb * kb);
                };
                return 2.0 * integrate_power_singular(half, p, 0.5 * t,
                                                      panel_quad_opts())
                                 .value;
            };
            break;
        }
    }
    return pk;
}

// ---------------------------------------------------------------------------
// Discrete solve
// ---------------------------------------------------------------------------

// Shared coefficient G[d] = M0[d] - M1[d] + M1[d+1]: the total weight a
// node value receives from its two adjacent panels at lag d.
std::vector<double> interior_weights(const KernelMoments& m, int N) {
    std::vector<double> G(N, 0.0);
    for (int d = 1; d <= N - 1; ++d) G[d] = m.M0[d] - m.M1[d] + m.M1[d + 1];
    return G;
}

void check_diagonal(double beta, double diag) {
    if (std::abs(1.0 - beta * diag) < 1e-12) {
        std::ostringstream msg;
        msg << "volterra solver: singular diagonal block |1 - beta*w_kk| = "
            << std::abs(1.0 - beta * diag) << "; change the step size";
        throw StepSizeError(msg.str());
    }
}

// Direct scheme: unknown at nodes 1..N, first panel constant u_1.
// u[0] untouched by caller convention.
void solve_direct(const KernelMoments& m, double beta,
                  const std::vector<double>& f, int N, std::vector<double>& u,
                  double* residual) {
    const auto G = interior_weights(m, N);
    check_diagonal(beta, m.M0[1]);
    if (N >= 2) check_diagonal(beta, m.M1[1]);
    u[1] = f[1] / (1.0 - beta * m.M0[1]);
    for (int k = 2; k <= N; ++k) {
        double s = u[1] * (m.M0[k] + m.M0[k - 1] - m.M1[k - 1]);
        for (int j = 2; j <= k - 1; ++j) s += u[j] * G[k - j];
        u[k] = (f[k] + beta * s) / (1.0 - beta * m.M1[1]);
    }
    if (residual) {
        // Independent resubstitution from the original panel decomposition.
        double worst = 0.0;
        for (int k = 1; k <= N; ++k) {
            double conv = u[1] * m.M0[k];  // constant first panel
            for (int j = 1; j <= k - 1; ++j) {
                const int d = k - j;
                conv += u[j] * (m.M0[d] - m.M1[d]) + u[j + 1] * m.M1[d];
            }
            worst = std::max(worst, std::abs(u[k] - f[k] - beta * conv));
        }
        *residual = worst;
    }
}

// Subtracted scheme: unknown w at nodes 0..N with w[0] = 0, linear on every
// panel including the first.
void solve_subtracted(const KernelMoments& m, double beta,
                      const std::vector<double>& f, int N, std::vector<double>& w,
                      double* residual) {
    const auto G = interior_weights(m, N);
    check_diagonal(beta, m.M1[1]);
    w[0] = 0.0;
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int j = 1; j <= k - 1; ++j) s += w[j] * G[k - j];
        w[k] = (f[k] + beta * s) / (1.0 - beta * m.M1[1]);
    }
    if (residual) {
        double worst = 0.0;
        for (int k = 1; k <= N; ++k) {
            double conv = w[1] * m.M1[k];  // first panel: 0 -> w_1
            for (int j = 1; j <= k - 1; ++j) {
                const int d = k - j;
                conv += w[j] * (m.M0[d] - m.M1[d]) + w[j + 1] * m.M1[d];
            }
            worst = std::max(worst, std::abs(w[k] - f[k] - beta * conv));
        }
        *residual = worst;
    }
}

// Cumulative integral of e^(weight s) k(s) over [0, t_k] by per-panel
// quadrature, singularity-aware on the first panel.
std::vector<double> cumulative_exp_kernel(const PanelKernel& pk, double weight,
                                          const Grid& grid, double p_singular) {
    const int N = grid.N;
    const double h = grid.h();
    std::vector<double> cum(N + 1, 0.0);
    for (int d = 1; d <= N; ++d) {
        const double A = (d - 1) * h, B = d * h;
        double panel;
        auto f = [&](double v) { return std::exp(weight * v) * pk.eval(v); };
        if (d == 1 && pk.singular) {
            panel = integrate_power_singular(f, p_singular, B, panel_quad_opts()).value;
        } else if (d == 1) {
            panel = integrate_adaptive(f, 0.0, B, panel_quad_opts()).value;
        } else {
            panel = integrate_adaptive(f, A, B, panel_quad_opts()).value;
        }
        cum[d] = cum[d - 1] + panel;
    }
    return cum;
}

// Cumulative trapezoid of g at the nodes (g[0] included).
std::vector<double> cumulative_trapezoid(const std::vector<double>& g, double h, int N) {
    std::vector<double> cum(N + 1, 0.0);
    for (int k = 1; k <= N; ++k) {
        cum[k] = cum[k - 1] + 0.5 * h * (g[k - 1] + g[k]);
    }
    return cum;
}

double interp_nodes(const std::vector<double>& vals, const Grid& grid, double t) {
    const double h = grid.h();
    if (t <= 0.0) return vals[0];
    if (t >= grid.T) return vals[grid.N];
    const int k = static_cast<int>(t / h);
    const double frac = (t - k * h) / h;
    return vals[k] * (1.0 - frac) + vals[k + 1] * frac;
}

double singular_power(const KernelSpec& kernel) {
    switch (kernel.kind) {
        case KernelKind::Fractional:
        case KernelKind::GammaFractional:
        case KernelKind::LogModulated:
            return kernel.H - 0.5;
        default:
            return 0.0;
    }
}

}  // namespace

ValueTable solve_linear_volterra(const KernelSpec& kernel, double beta,
                                 const std::function<double(double)>& forcing,
                                 const Grid& grid) {
    grid.validate();
    const int N = grid.N;
    ValueTable table;
    table.grid = grid;
    table.values.assign(N + 1, kNaN);
    std::vector<double> f(N + 1, 0.0);
    for (int k = 1; k <= N; ++k) f[k] = forcing(grid.node(k));
    const KernelMoments m = kernel_lag_moments(kernel, grid);
    solve_direct(m, beta, f, N, table.values, &table.residual);
    return table;
}

ResolventTable resolvent_table(const KernelSpec& kernel, double beta,
                               double lambda, const Grid& grid) {
    grid.validate();
    const int N = grid.N;
    const double h = grid.h();
    ResolventTable t;
    t.grid = grid;
    t.kernel = kernel;
    t.beta = beta;
    t.lambda = lambda;
    t.EK.assign(N + 1, kNaN);
    t.RK.assign(N + 1, kNaN);
    t.w.assign(N + 1, 0.0);

    const PanelKernel pk = make_panel_kernel(kernel, grid);
    std::vector<double> f(N + 1, 0.0);
    if (pk.singular) {
        // w = beta K*K + beta K * w; EK = K + w.
        for (int k = 1; k <= N; ++k) f[k] = beta * pk.conv_self(grid.node(k));
        solve_subtracted(pk.moments, beta, f, N, t.w, &t.residual);
        for (int k = 1; k <= N; ++k) t.EK[k] = pk.eval(grid.node(k)) + t.w[k];
    } else {
        for (int k = 1; k <= N; ++k) f[k] = pk.eval(grid.node(k));
        solve_direct(pk.moments, beta, f, N, t.EK, &t.residual);
        for (int k = 1; k <= N; ++k) t.w[k] = t.EK[k] - pk.eval(grid.node(k));
    }
    for (int k = 1; k <= N; ++k) t.RK[k] = -beta * t.EK[k];

    // E1(t) = 1 + beta * int_0^t e^(lambda s) EK(s) ds; the kernel part is
    // integrated exactly per panel, the continuous remainder w by trapezoid.
    const auto cum_k = cumulative_exp_kernel(pk, lambda, grid, singular_power(kernel));
    std::vector<double> ew(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) ew[k] = std::exp(lambda * grid.node(k)) * t.w[k];
    const auto cum_w = cumulative_trapezoid(ew, h, N);
    t.E1.assign(N + 1, 0.0);
    t.E1bar.assign(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) {
        t.E1[k] = 1.0 + beta * (cum_k[k] + cum_w[k]);
        t.E1bar[k] = std::exp(-lambda * grid.node(k)) * t.E1[k];
    }

    // cum EK = sum of exact kernel panel masses + trapezoid of w.
    t.cumEK.assign(N + 1, 0.0);
    const auto cum_w_plain = cumulative_trapezoid(t.w, h, N);
    double mass = 0.0;
    for (int k = 1; k <= N; ++k) {
        mass += pk.moments.M0[k];
        t.cumEK[k] = mass + cum_w_plain[k];
    }
    return t;
}

double ResolventTable::EK_at(double t) const {
    if (!(t > 0.0)) throw std::domain_error("EK_at: requires t > 0");
    return kernel_eval(kernel, t) + interp_nodes(w, grid, t);
}

double ResolventTable::E1_at(double t) const { return interp_nodes(E1, grid, t); }

double ResolventTable::cumEK_at(double t) const { return interp_nodes(cumEK, grid, t); }

SquaredResolventTable resolvent_squared_kernel(const KernelSpec& kernel,
                                               double sigma0, const Grid& grid) {
    grid.validate();
    const int N = grid.N;
    SquaredResolventTable t;
    t.grid = grid;
    t.kernel = kernel;
    t.sigma0 = sigma0;
    t.R.assign(N + 1, kNaN);
    t.wbar.assign(N + 1, 0.0);
    if (sigma0 == 0.0) {
        for (int k = 1; k <= N; ++k) t.R[k] = 0.0;
        t.residual = 0.0;
        t.sign_ok = true;
        return t;
    }
    const PanelKernel pk = make_squared_panel_kernel(kernel, sigma0, grid);
    // R = Kbar - Kbar * R, i.e. the beta = -1 resolvent with forcing Kbar.
    std::vector<double> f(N + 1, 0.0);
    if (pk.singular) {
        // wbar = -Kbar*Kbar - Kbar * wbar; R = Kbar + wbar.
        for (int k = 1; k <= N; ++k) f[k] = -pk.conv_self(grid.node(k));
        solve_subtracted(pk.moments, -1.0, f, N, t.wbar, &t.residual);
        for (int k = 1; k <= N; ++k) t.R[k] = pk.eval(grid.node(k)) + t.wbar[k];
    } else {
        for (int k = 1; k <= N; ++k) f[k] = pk.eval(grid.node(k));
        solve_direct(pk.moments, -1.0, f, N, t.R, &t.residual);
        for (int k = 1; k <= N; ++k) t.wbar[k] = t.R[k] - pk.eval(grid.node(k));
    }
    t.max_sign_violation = 0.0;
    for (int k = 1; k <= N; ++k) {
        t.max_sign_violation = std::max(t.max_sign_violation, t.R[k]);
    }
    t.max_sign_violation = std::max(0.0, t.max_sign_violation);
    t.sign_ok = t.max_sign_violation <= kSolverDeclaredTolerance;
    return t;
}

std::vector<double> SquaredResolventTable::cum_exp_weighted(double lambda) const {
    const int N = grid.N;
    const double h = grid.h();
    if (sigma0 == 0.0) return std::vector<double>(N + 1, 0.0);
    // Only pointwise values of Kbar are needed here; skip the moment build.
    PanelKernel pk;
    const KernelSpec k = kernel;
    const double s2 = sigma0 * sigma0;
    pk.eval = [k, s2](double t) {
        const double v = kernel_eval(k, t);
        return -s2 * v * v;
    };
    pk.singular = kernel.singular_at_zero();
    const double p = pk.singular ? 2.0 * kernel.H - 1.0 : 0.0;
    const auto cum_k = cumulative_exp_kernel(pk, 2.0 * lambda, grid, p);
    std::vector<double> ew(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) ew[k] = std::exp(2.0 * lambda * grid.node(k)) * wbar[k];
    const auto cum_w = cumulative_trapezoid(ew, h, N);
    std::vector<double> cum(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) cum[k] = cum_k[k] + cum_w[k];
    return cum;
}

void write_resolvent_csv(const ResolventTable& table, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"t", "EK", "RK", "E1", "E1bar"});
    for (int k = 1; k <= table.grid.N; ++k) {
        csv.row({fmt_g17(table.grid.node(k)), fmt_g17(table.EK[k]), fmt_g17(table.RK[k]),
                 fmt_g17(table.E1[k]), fmt_g17(table.E1bar[k])});
    }
}

}  // namespace sve
