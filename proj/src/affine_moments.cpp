#include "sve/affine_moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sve/io.hpp"
#include "sve/quadrature.hpp"

namespace sve {
namespace {

QuadratureOptions moment_quad_opts() {
    QuadratureOptions o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-11;
    return o;
}

double kbar_power(const KernelSpec& kernel) {
    return kernel.singular_at_zero() ? 2.0 * kernel.H - 1.0 : 0.0;
}

// A(tau) = int_0^tau e^(lambda s) K(s)^2 ds, singularity-aware at 0.
double exp_weighted_square_mass(const KernelSpec& kernel, double lambda,
                                double tau) {
    if (tau <= 0.0) return 0.0;
    if (lambda == 0.0 && kernel.has_closed_square_integral()) {
        return kernel_integrate_sq(kernel, tau);
    }
    auto f = [&](double s) {
        const double k = kernel_eval(kernel, s);
        return std::exp(lambda * s) * k * k;
    };
    return integrate_power_singular(f, kbar_power(kernel), tau, moment_quad_opts())
        .value;
}

double lerp_nodes(const std::vector<double>& vals, const Grid& grid, double t) {
    const double h = grid.h();
    if (t <= 0.0) return vals.front();
    if (t >= grid.T) return vals.back();
    const int k = static_cast<int>(t / h);
    const double frac = (t - k * h) / h;
    return vals[k] * (1.0 - frac) + vals[k + 1] * frac;
}

void require_window(double t, double T, double horizon, const char* who) {
    if (!(t >= 0.0) || !(t < T)) {
        std::ostringstream msg;
        msg << who << ": requires 0 <= t < T, got t=" << t << ", T=" << T;
        throw std::invalid_argument(msg.str());
    }
    if (T > horizon * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << who << ": horizon T=" << T << " exceeds grid horizon " << horizon;
        throw std::invalid_argument(msg.str());
    }
}

void require_table_match(const ModelSpec& model, const ResolventTable& table,
                         const char* who) {
    if (model.beta != table.beta || model.lambda != table.lambda) {
        std::ostringstream msg;
        msg << who << ": resolvent table was built for (beta=" << table.beta
            << ", lambda=" << table.lambda << ") but the model has (beta="
            << model.beta << ", lambda=" << model.lambda << ")";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

void ModelSpec::validate() const {
    auto in_domain = [&](double v) {
        switch (state_space) {
            case StateSpace::AllReals:
                return true;
            case StateSpace::NonnegativeReals:
                return v >= 0.0;
            case StateSpace::Interval:
                return v >= alpha1 && v <= alpha2;
        }
        return false;
    };
    if (!(chi_b > 0.0 && chi_b <= 1.0) || !(chi_sigma > 0.0 && chi_sigma <= 1.0)) {
        throw std::invalid_argument("ModelSpec: holder exponents must lie in (0, 1]");
    }
    if (state_space == StateSpace::Interval && !(alpha1 < alpha2)) {
        throw std::invalid_argument("ModelSpec: interval state space needs alpha1 < alpha2");
    }
    if (!in_domain(x)) {
        throw std::invalid_argument("ModelSpec: initial value x lies outside the state space");
    }
    if (diffusion == DiffusionKind::SqrtVol) {
        if (state_space != StateSpace::NonnegativeReals) {
            throw std::invalid_argument(
                "ModelSpec: square-root diffusion requires the nonnegative state space");
        }
        if (x < 0.0) {
            throw std::invalid_argument("ModelSpec: square-root diffusion requires x >= 0");
        }
    }
    if (diffusion == DiffusionKind::Jacobi) {
        if (!(alpha1 < alpha2)) {
            throw std::invalid_argument("ModelSpec: Jacobi diffusion needs alpha1 < alpha2");
        }
        if (!(x >= alpha1 && x <= alpha2)) {
            throw std::invalid_argument(
                "ModelSpec: Jacobi diffusion requires x in [alpha1, alpha2]");
        }
    }
    if (b0 != 0.0 && beta != 0.0) {
        const double anchor = lambda == 0.0 ? 0.0 : -b0 / beta;
        if (!in_domain(anchor)) {
            std::ostringstream msg;
            msg << "ModelSpec: with both drift coefficients nonzero the value "
                << anchor << " (0 for lambda = 0, else -b0/beta) must lie in the "
                   "state space";
            throw std::invalid_argument(msg.str());
        }
    }
}

double ModelSpec::sigma_at(double y) const {
    switch (diffusion) {
        case DiffusionKind::ConstantVol:
            return sigma0;
        case DiffusionKind::SqrtVol:
            return sigma0 * std::sqrt(std::max(y, 0.0));
        case DiffusionKind::LinearVol:
            return sigma0 * y;
        case DiffusionKind::Jacobi:
            return std::sqrt(std::max(y - alpha1, 0.0) * std::max(alpha2 - y, 0.0));
    }
    return 0.0;
}

bool DefectReport::consistent() const { return std::abs(defect) <= tolerance; }

std::string DefectReport::verdict() const {
    return consistent() ? "consistent" : "violated";
}

double first_moment(const ModelSpec& model, const KernelSpec& kernel, double T,
                    const Grid& grid) {
    if (model.beta == 0.0) {
        return model.x * std::exp(-model.lambda * T) +
               model.b0 * kernel_integrate(kernel, 0.0, T);
    }
    require_window(0.0, T, grid.T, "first_moment");
    const ResolventTable table = resolvent_table(kernel, model.beta, model.lambda, grid);
    return first_moment(model, table, T);
}

double first_moment(const ModelSpec& model, const ResolventTable& table, double T) {
    require_table_match(model, table, "first_moment");
    require_window(0.0, T, table.grid.T, "first_moment");
    return std::exp(-model.lambda * T) * table.E1_at(T) * model.x +
           model.b0 * table.cumEK_at(T);
}

DefectReport first_moment_flow_defect(const ModelSpec& model,
                                      const KernelSpec& kernel, double t, double T,
                                      const Grid& grid) {
    require_window(t, T, grid.T, "first_moment_flow_defect");
    if (model.beta == 0.0) {
        // EK = K and E1 = 1: the defect reduces to
        // b0 (F(T) - e^(-lambda (T-t)) F(t) - F(T-t)) with F = int K.
        DefectReport r;
        r.t = t;
        r.T = T;
        r.tolerance = kFirstMomentTolerance;
        const double FT = kernel_integrate(kernel, 0.0, T);
        const double Ft = kernel_integrate(kernel, 0.0, t);
        const double Fd = kernel_integrate(kernel, 0.0, T - t);
        r.defect =
            model.b0 * (FT - std::exp(-model.lambda * (T - t)) * Ft - Fd);
        return r;
    }
    const ResolventTable table = resolvent_table(kernel, model.beta, model.lambda, grid);
    return first_moment_flow_defect(model, table, t, T);
}

DefectReport first_moment_flow_defect(const ModelSpec& model,
                                      const ResolventTable& table, double t,
                                      double T) {
    require_table_match(model, table, "first_moment_flow_defect");
    require_window(t, T, table.grid.T, "first_moment_flow_defect");
    DefectReport r;
    r.t = t;
    r.T = T;
    r.tolerance = kFirstMomentTolerance;
    const double lam = model.lambda;
    const double direct = std::exp(-lam * T) * table.E1_at(T) * model.x +
                          model.b0 * table.cumEK_at(T);
    const double restarted =
        std::exp(-lam * T) * table.E1_at(T - t) * table.E1_at(t) * model.x +
        model.b0 * std::exp(-lam * (T - t)) * table.E1_at(T - t) * table.cumEK_at(t) +
        model.b0 * table.cumEK_at(T - t);
    r.defect = direct - restarted;
    return r;
}

double second_moment_sqrt(const ModelSpec& model, const KernelSpec& kernel,
                          double T) {
    if (model.diffusion != DiffusionKind::SqrtVol) {
        throw std::invalid_argument("second_moment_sqrt: needs square-root diffusion");
    }
    if (model.b0 != 0.0 || model.beta != 0.0) {
        throw std::invalid_argument("second_moment_sqrt: needs zero drift");
    }
    if (model.x < 0.0) {
        throw std::invalid_argument("second_moment_sqrt: needs x >= 0");
    }
    const double lam = model.lambda;
    const double mass = exp_weighted_square_mass(kernel, lam, T);
    return model.x * model.x * std::exp(-2.0 * lam * T) +
           model.x * model.sigma0 * model.sigma0 * std::exp(-lam * T) * mass;
}

DefectReport second_moment_sqrt_defect(const KernelSpec& kernel, double lambda,
                                       double t, double T) {
    require_window(t, T, T, "second_moment_sqrt_defect");
    DefectReport r;
    r.t = t;
    r.T = T;
    r.tolerance = kSqrtSecondMomentTolerance;
    const double AT = exp_weighted_square_mass(kernel, lambda, T);
    const double At = exp_weighted_square_mass(kernel, lambda, t);
    const double Ad = exp_weighted_square_mass(kernel, lambda, T - t);
    r.defect = std::exp(-lambda * T) * AT -
               std::exp(-2.0 * lambda * (T - t)) * std::exp(-lambda * t) * At -
               std::exp(-lambda * T) * Ad;
    return r;
}

double second_moment_sqrt_drifted(const ModelSpec& model,
                                  const ResolventTable& table, double T) {
    if (model.diffusion != DiffusionKind::SqrtVol) {
        throw std::invalid_argument("second_moment_sqrt_drifted: needs square-root diffusion");
    }
    require_table_match(model, table, "second_moment_sqrt_drifted");
    require_window(0.0, T, table.grid.T, "second_moment_sqrt_drifted");
    const auto mean_at = [&](double u) {
        return std::exp(-model.lambda * u) * table.E1_at(u) * model.x +
               model.b0 * table.cumEK_at(u);
    };
    // int_0^T EK(v)^2 mean(T - v) dv, integrated panel by panel on the table
    // grid so the piecewise-linear interpolants stay smooth inside each call.
    const Grid& grid = table.grid;
    const double h = grid.h();
    const int full = std::min<int>(grid.N, static_cast<int>(std::floor(T / h + 1e-9)));
    auto f = [&](double v) {
        const double e = table.EK_at(v);
        return e * e * mean_at(T - v);
    };
    double mass = 0.0;
    for (int d = 1; d <= full; ++d) {
        const double A = (d - 1) * h, B = d * h;
        if (d == 1) {
            mass += integrate_power_singular(f, kbar_power(table.kernel), B,
                                             moment_quad_opts())
                        .value;
        } else {
            mass += integrate_adaptive(f, A, B, moment_quad_opts()).value;
        }
    }
    if (T > full * h + 1e-12 * grid.T) {
        mass += integrate_adaptive(f, full * h, T, moment_quad_opts()).value;
    }
    const double m_T = mean_at(T);
    return m_T * m_T + model.sigma0 * model.sigma0 * mass;
}

double second_moment_linear(const ModelSpec& model, const KernelSpec& kernel,
                            double T, const Grid& grid) {
    if (model.diffusion != DiffusionKind::LinearVol) {
        throw std::invalid_argument("second_moment_linear: needs linear diffusion");
    }
    if (model.b0 != 0.0 || model.beta != 0.0) {
        throw std::invalid_argument("second_moment_linear: needs zero drift");
    }
    require_window(0.0, T, grid.T, "second_moment_linear");
    const SquaredResolventTable table =
        resolvent_squared_kernel(kernel, model.sigma0, grid);
    const auto cum = table.cum_exp_weighted(model.lambda);
    const double CT = lerp_nodes(cum, grid, T);
    return model.x * model.x * std::exp(-2.0 * model.lambda * T) * (1.0 - CT);
}

DefectReport second_moment_linear_defect(const std::vector<double>& cum,
                                         const Grid& grid, double t, double T) {
    require_window(t, T, grid.T, "second_moment_linear_defect");
    DefectReport r;
    r.t = t;
    r.T = T;
    r.tolerance = kLinearSecondMomentTolerance;
    const double CT = lerp_nodes(cum, grid, T);
    const double Ct = lerp_nodes(cum, grid, t);
    const double Cd = lerp_nodes(cum, grid, T - t);
    r.defect = (CT - Cd) - Ct * (1.0 - Cd);
    return r;
}

DefectReport second_moment_linear_defect(const KernelSpec& kernel, double lambda,
                                         double sigma0, double t, double T,
                                         const Grid& grid) {
    const SquaredResolventTable table = resolvent_squared_kernel(kernel, sigma0, grid);
    return second_moment_linear_defect(table.cum_exp_weighted(lambda), grid, t, T);
}

DefectReport second_moment_linear_defect(const SquaredResolventTable& table,
                                         double lambda, double t, double T) {
    return second_moment_linear_defect(table.cum_exp_weighted(lambda), table.grid,
                                       t, T);
}

ExpFitReport exponential_fit_test(const KernelSpec& kernel, double lambda,
                                  const Grid& grid, double tol) {
    grid.validate();
    ExpFitReport r;
    const double t1 = grid.node(1);
    const double k1 = kernel_eval(kernel, t1);
    r.c_fit = k1 * std::exp(lambda * t1);
    double sup = 0.0;
    for (int k = 1; k <= grid.N; ++k) {
        const double t = grid.node(k);
        const double fitted = k1 * std::exp(-lambda * (t - t1));
        sup = std::max(sup, std::abs(kernel_eval(kernel, t) - fitted));
    }
    r.sup_deviation = sup;
    r.ok = sup <= tol;
    return r;
}

void write_defect_rows_csv(const std::vector<DefectRow>& rows,
                           const std::string& path) {
    CsvWriter csv(path);
    csv.row({"kernel", "lambda", "b0", "beta", "t", "T", "defect", "verdict"});
    for (const auto& row : rows) {
        csv.row({row.kernel_id, fmt_g17(row.lambda), fmt_g17(row.b0),
                 fmt_g17(row.beta), fmt_g17(row.report.t), fmt_g17(row.report.T),
                 fmt_g17(row.report.defect), row.report.verdict()});
    }
}

}  // namespace sve
