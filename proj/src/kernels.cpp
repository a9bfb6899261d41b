#include "sve/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sve/errors.hpp"
#include "sve/quadrature.hpp"
#include "sve/special_functions.hpp"

namespace sve {
namespace {

void require_fractional_H(double H) {
    if (!(H > 0.0)) throw std::invalid_argument("kernel: requires H > 0");
}

// Piecewise-linear table lookup; t must lie inside [front, back].
double table_eval(const KernelSpec& k, double t) {
    const auto& ts = k.table_t;
    const auto& vs = k.table_v;
    if (t < ts.front() || t > ts.back()) {
        std::ostringstream msg;
        msg << "kernel_eval: t = " << t << " outside tabulation range ["
            << ts.front() << ", " << ts.back() << "]";
        throw std::domain_error(msg.str());
    }
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return vs.front();
    if (it == ts.end()) return vs.back();
    const size_t j = static_cast<size_t>(it - ts.begin());
    const double t0 = ts[j - 1], t1 = ts[j];
    const double w = (t - t0) / (t1 - t0);
    return vs[j - 1] * (1.0 - w) + vs[j] * w;
}

// Exact integral of the piecewise-linear table over [a, b] (trapezoid on
// each covered segment is exact for a linear function).
double table_integrate(const KernelSpec& k, double a, double b) {
    const auto& ts = k.table_t;
    if (a < ts.front() || b > ts.back()) {
        throw std::domain_error("kernel_integrate: range outside tabulation range");
    }
    double total = 0.0;
    for (size_t j = 1; j < ts.size(); ++j) {
        const double lo = std::max(a, ts[j - 1]);
        const double hi = std::min(b, ts[j]);
        if (hi <= lo) continue;
        total += 0.5 * (table_eval(k, lo) + table_eval(k, hi)) * (hi - lo);
    }
    return total;
}

// Exact integral of the squared piecewise-linear table over [0, t]
// (Simpson is exact for the quadratic integrand on each segment).
double table_integrate_sq(const KernelSpec& k, double t) {
    const auto& ts = k.table_t;
    if (t > ts.back()) {
        throw std::domain_error("kernel_integrate_sq: t outside tabulation range");
    }
    const double a = ts.front();
    double total = 0.0;
    for (size_t j = 1; j < ts.size(); ++j) {
        const double lo = std::max(a, ts[j - 1]);
        const double hi = std::min(t, ts[j]);
        if (hi <= lo) continue;
        const double va = table_eval(k, lo);
        const double vb = table_eval(k, hi);
        const double vm = 0.5 * (va + vb);
        total += (hi - lo) / 6.0 * (va * va + 4.0 * vm * vm + vb * vb);
    }
    return total;
}

}  // namespace

bool KernelSpec::has_closed_antiderivative() const {
    switch (kind) {
        case KernelKind::Exponential:
        case KernelKind::Fractional:
        case KernelKind::GammaFractional:
        case KernelKind::Constant:
        case KernelKind::Tabulated:
            return true;
        case KernelKind::LogModulated:
            return false;
    }
    return false;
}

bool KernelSpec::has_closed_square_integral() const {
    switch (kind) {
        case KernelKind::Exponential:
        case KernelKind::Fractional:
        case KernelKind::GammaFractional:
        case KernelKind::Constant:
        case KernelKind::Tabulated:
            return true;
        case KernelKind::LogModulated:
            return false;
    }
    return false;
}

bool KernelSpec::singular_at_zero() const {
    switch (kind) {
        case KernelKind::Fractional:
        case KernelKind::GammaFractional:
            return H < 0.5;
        case KernelKind::LogModulated:
            return H <= 0.5;  // the log factor still diverges at H = 1/2
        default:
            return false;
    }
}

std::string KernelSpec::id() const {
    std::ostringstream s;
    switch (kind) {
        case KernelKind::Exponential:
            s << "exponential(c=" << c << ",rate=" << rate << ")";
            break;
        case KernelKind::Fractional:
            s << "fractional(H=" << H << ",scale=" << scale << ")";
            break;
        case KernelKind::GammaFractional:
            s << "gamma_fractional(H=" << H << ",damping=" << damping
              << ",scale=" << scale << ")";
            break;
        case KernelKind::LogModulated:
            s << "log_modulated(H=" << H << ")";
            break;
        case KernelKind::Constant:
            s << "constant(c=" << c << ")";
            break;
        case KernelKind::Tabulated:
            s << "tabulated(n=" << table_t.size() << ")";
            break;
    }
    return s.str();
}

KernelSpec KernelSpec::exponential(double c, double rate) {
    KernelSpec k;
    k.kind = KernelKind::Exponential;
    k.c = c;
    k.rate = rate;
    return k;
}

KernelSpec KernelSpec::fractional(double H, double scale) {
    require_fractional_H(H);
    KernelSpec k;
    k.kind = KernelKind::Fractional;
    k.H = H;
    k.scale = scale;
    return k;
}

KernelSpec KernelSpec::gamma_fractional(double H, double damping, double scale) {
    require_fractional_H(H);
    if (!(damping >= 0.0)) throw std::invalid_argument("kernel: requires damping >= 0");
    KernelSpec k;
    k.kind = KernelKind::GammaFractional;
    k.H = H;
    k.damping = damping;
    k.scale = scale;
    return k;
}

KernelSpec KernelSpec::log_modulated(double H) {
    require_fractional_H(H);
    KernelSpec k;
    k.kind = KernelKind::LogModulated;
    k.H = H;
    k.scale = 1.0;
    return k;
}

KernelSpec KernelSpec::constant(double c) {
    KernelSpec k;
    k.kind = KernelKind::Constant;
    k.c = c;
    return k;
}

KernelSpec KernelSpec::tabulated(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size() || t.size() < 2) {
        throw std::invalid_argument("kernel: tabulated needs >= 2 matching samples");
    }
    for (size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) {
            throw std::invalid_argument("kernel: tabulated grid must be strictly increasing");
        }
    }
    if (!(t.front() >= 0.0)) throw std::invalid_argument("kernel: tabulated grid must be >= 0");
    KernelSpec k;
    k.kind = KernelKind::Tabulated;
    k.table_t = std::move(t);
    k.table_v = std::move(v);
    return k;
}

KernelSpec KernelSpec::exotic_exponential_decay(double t_max, int n_points) {
    if (!(t_max > 0.0) || n_points < 2) {
        throw std::invalid_argument("kernel: bad exotic table parameters");
    }
    std::vector<double> ts(n_points), vs(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double t = t_max * static_cast<double>(i) / (n_points - 1);
        ts[i] = t;
        vs[i] = t == 0.0 ? 0.0 : std::exp(-0.5 / t) / t;
    }
    return tabulated(std::move(ts), std::move(vs));
}

double kernel_eval(const KernelSpec& kernel, double t) {
    if (t < 0.0) throw std::domain_error("kernel_eval: requires t >= 0");
    switch (kernel.kind) {
        case KernelKind::Constant:
            return kernel.c;
        case KernelKind::Exponential:
            return kernel.c * std::exp(-kernel.rate * t);
        case KernelKind::Fractional:
            if (t == 0.0) {
                if (kernel.H < 0.5) throw std::domain_error("kernel_eval: singular at t = 0");
                return kernel.H == 0.5 ? kernel.scale : 0.0;
            }
            return kernel.scale * std::pow(t, kernel.H - 0.5);
        case KernelKind::GammaFractional:
            if (t == 0.0) {
                if (kernel.H < 0.5) throw std::domain_error("kernel_eval: singular at t = 0");
                return kernel.H == 0.5 ? kernel.scale : 0.0;
            }
            return kernel.scale * std::pow(t, kernel.H - 0.5) * std::exp(-kernel.damping * t);
        case KernelKind::LogModulated:
            if (t == 0.0) {
                if (kernel.H <= 0.5) throw std::domain_error("kernel_eval: singular at t = 0");
                return 0.0;  // power beats the log divergence for H > 1/2
            }
            return std::pow(t, kernel.H - 0.5) / gamma_fn(kernel.H + 0.5) *
                   std::log1p(1.0 / t);
        case KernelKind::Tabulated:
            return table_eval(kernel, t);
    }
    throw std::logic_error("kernel_eval: unknown kind");
}

double kernel_integrate(const KernelSpec& kernel, double a, double b) {
    if (!(a >= 0.0) || !(b >= a)) {
        throw std::invalid_argument("kernel_integrate: requires 0 <= a <= b");
    }
    if (a == b) return 0.0;
    switch (kernel.kind) {
        case KernelKind::Constant:
            return kernel.c * (b - a);
        case KernelKind::Exponential:
            if (kernel.rate == 0.0) return kernel.c * (b - a);
            return kernel.c * (std::exp(-kernel.rate * a) - std::exp(-kernel.rate * b)) /
                   kernel.rate;
        case KernelKind::Fractional: {
            const double alpha = kernel.H + 0.5;
            return kernel.scale * (std::pow(b, alpha) - std::pow(a, alpha)) / alpha;
        }
        case KernelKind::GammaFractional: {
            const double alpha = kernel.H + 0.5;
            const double d = kernel.damping;
            if (d == 0.0) {
                return kernel.scale * (std::pow(b, alpha) - std::pow(a, alpha)) / alpha;
            }
            const double gb = lower_incomplete_gamma(alpha, d * b);
            const double ga = a == 0.0 ? 0.0 : lower_incomplete_gamma(alpha, d * a);
            return kernel.scale * std::pow(d, -alpha) * (gb - ga);
        }
        case KernelKind::Tabulated:
            return table_integrate(kernel, a, b);
        case KernelKind::LogModulated: {
            auto f = [&](double s) { return kernel_eval(kernel, s); };
            if (a == 0.0) {
                return integrate_power_singular(f, kernel.H - 0.5, b).value;
            }
            return integrate_adaptive(f, a, b).value;
        }
    }
    throw std::logic_error("kernel_integrate: unknown kind");
}

double kernel_integrate_sq(const KernelSpec& kernel, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("kernel_integrate_sq: requires t >= 0");
    if (t == 0.0) return 0.0;
    switch (kernel.kind) {
        case KernelKind::Constant:
            return kernel.c * kernel.c * t;
        case KernelKind::Exponential:
            if (kernel.rate == 0.0) return kernel.c * kernel.c * t;
            return kernel.c * kernel.c * (1.0 - std::exp(-2.0 * kernel.rate * t)) /
                   (2.0 * kernel.rate);
        case KernelKind::Fractional:
            return kernel.scale * kernel.scale * std::pow(t, 2.0 * kernel.H) /
                   (2.0 * kernel.H);
        case KernelKind::GammaFractional: {
            const double d = kernel.damping;
            if (d == 0.0) {
                return kernel.scale * kernel.scale * std::pow(t, 2.0 * kernel.H) /
                       (2.0 * kernel.H);
            }
            return kernel.scale * kernel.scale * std::pow(2.0 * d, -2.0 * kernel.H) *
                   lower_incomplete_gamma(2.0 * kernel.H, 2.0 * d * t);
        }
        case KernelKind::Tabulated:
            return table_integrate_sq(kernel, t);
        case KernelKind::LogModulated: {
            auto f = [&](double s) {
                const double k = kernel_eval(kernel, s);
                return k * k;
            };
            return integrate_power_singular(f, 2.0 * kernel.H - 1.0, t).value;
        }
    }
    throw std::logic_error("kernel_integrate_sq: unknown kind");
}

double lambda_n(const KernelSpec& kernel, long n) {
    if (n < 1) throw std::invalid_argument("lambda_n: requires n >= 1");
    const double denom = kernel_integrate_sq(kernel, 1.0 / static_cast<double>(n));
    if (!(denom > 0.0)) {
        throw std::domain_error("lambda_n: kernel vanishes a.e. on [0, 1/n]");
    }
    return 1.0 / denom;
}

KernelSpec limit_kernel(const KernelSpec& kernel) {
    switch (kernel.kind) {
        case KernelKind::Fractional:
        case KernelKind::GammaFractional:
        case KernelKind::LogModulated:
            return KernelSpec::fractional(kernel.H, std::sqrt(2.0 * kernel.H));
        case KernelKind::Constant:
            if (!(kernel.c > 0.0)) {
                throw UnsupportedKindError(
                    "limit_kernel: requires a strictly positive value at 0");
            }
            return KernelSpec::constant(1.0);
        case KernelKind::Exponential:
            if (!(kernel.c > 0.0)) {
                throw UnsupportedKindError(
                    "limit_kernel: requires a strictly positive value at 0");
            }
            return KernelSpec::constant(1.0);
        case KernelKind::Tabulated:
            throw UnsupportedKindError(
                "limit_kernel: unsupported for tabulated kernels (no declared "
                "small-time power behavior; e.g. (1/t)e^{-1/(2t)} fails every "
                "power-law lower bound)");
    }
    throw std::logic_error("limit_kernel: unknown kind");
}

BoundsReport check_small_time_bounds(const KernelSpec& kernel,
                                     const SmallTimeBounds& bounds,
                                     std::span<const double> grid) {
    if (grid.empty()) {
        throw std::invalid_argument("check_small_time_bounds: grid must be nonempty");
    }
    if (!(bounds.gamma > 0.0) || !(bounds.gamma_star >= bounds.gamma) ||
        !(bounds.C > 0.0) || !(bounds.C_star > 0.0)) {
        throw std::invalid_argument("check_small_time_bounds: invalid bounds");
    }
    BoundsReport report;
    report.ok = true;
    for (double t : grid) {
        if (!(t > 0.0 && t <= 1.0)) {
            throw std::invalid_argument("check_small_time_bounds: grid must lie in (0, 1]");
        }
        const double value = kernel_integrate_sq(kernel, t);
        const double lower = bounds.C_star * std::pow(t, 2.0 * bounds.gamma_star);
        const double upper = bounds.C * std::pow(t, 2.0 * bounds.gamma);
        // Tiny relative slack absorbs floating-point rounding in the
        // exact-equality configurations.
        const double slack = 1e-12;
        const bool ok_lower = value >= lower * (1.0 - slack);
        const bool ok_upper = value <= upper * (1.0 + slack);
        if (!ok_lower || !ok_upper) {
            report.ok = false;
            report.violations.push_back({t, value, lower, upper});
        }
    }
    return report;
}

bool corridor_ok(const SmallTimeBounds& bounds, double chi_sigma) {
    if (!(chi_sigma > 0.0 && chi_sigma <= 1.0)) {
        throw std::invalid_argument("corridor_ok: requires chi_sigma in (0, 1]");
    }
    const double cap = std::min(bounds.gamma + 0.5, bounds.gamma * (1.0 + chi_sigma));
    return bounds.gamma_star < cap;
}

}  // namespace sve
