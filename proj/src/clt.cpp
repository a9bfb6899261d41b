#include "sve/clt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sve/gaussian_rl.hpp"
#include "sve/io.hpp"
#include "sve/mc_sim.hpp"
#include "sve/quadrature.hpp"

namespace sve {
namespace {

QuadratureOptions clt_quad_opts() {
    QuadratureOptions o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-11;
    return o;
}

// Covariance of the limiting stochastic convolution (unit volatility):
// int_0^s Kbar(t-s+r) Kbar(r) dr for the limit kernel of `kernel`.
double limit_covariance(const KernelSpec& kernel, double s, double t) {
    const KernelSpec kbar = limit_kernel(kernel);
    if (kbar.kind == KernelKind::Constant) {
        return kbar.c * kbar.c * std::min(s, t);
    }
    return kbar.scale * kbar.scale * rl_covariance(kbar.H, s, t);
}

}  // namespace

RescaleSpec make_rescale_spec(const KernelSpec& kernel, long n, double x0) {
    if (n < 1) throw std::invalid_argument("make_rescale_spec: requires n >= 1");
    RescaleSpec spec;
    spec.n = n;
    spec.x0 = x0;
    spec.lambda_n = lambda_n(kernel, n);
    if (!(spec.lambda_n > 0.0)) {
        throw std::invalid_argument("make_rescale_spec: lambda_n must be positive");
    }
    return spec;
}

double rescale(const RescaleSpec& spec, double y) {
    return std::sqrt(spec.lambda_n) * (y - spec.x0);
}

double rescale_inverse(const RescaleSpec& spec, double z) {
    return spec.x0 + z / std::sqrt(spec.lambda_n);
}

std::vector<CovLimitRow> covariance_limit_check(const KernelSpec& kernel, double s,
                                                double t,
                                                const std::vector<long>& n_list) {
    if (!(0.0 < s && s <= t)) {
        throw std::invalid_argument("covariance_limit_check: requires 0 < s <= t");
    }
    const double limit = limit_covariance(kernel, s, t);
    const double p = kernel.singular_at_zero() ? kernel.H - 0.5 : 0.0;
    std::vector<CovLimitRow> rows;
    rows.reserve(n_list.size());
    for (long n : n_list) {
        if (n < 1) throw std::invalid_argument("covariance_limit_check: requires n >= 1");
        const double lam = lambda_n(kernel, n);
        double mass;
        if (s == t) {
            mass = kernel_integrate_sq(kernel, s / static_cast<double>(n));
        } else {
            const double shift = (t - s) / static_cast<double>(n);
            auto f = [&](double r) {
                return kernel_eval(kernel, shift + r) * kernel_eval(kernel, r);
            };
            mass = integrate_power_singular(f, p, s / static_cast<double>(n),
                                            clt_quad_opts())
                       .value;
        }
        rows.push_back({n, lam * mass, limit});
    }
    return rows;
}

CltReport clt_empirical_check(const ModelSpec& model, const KernelSpec& kernel,
                              const std::vector<double>& times, long n,
                              std::int64_t n_paths, std::uint64_t seed) {
    model.validate();
    if (model.lambda != 0.0) {
        throw std::invalid_argument("clt_empirical_check: requires lambda = 0");
    }
    const double sigma_x0 = model.sigma_at(model.x);
    if (sigma_x0 == 0.0) {
        throw std::invalid_argument("clt_empirical_check: requires sigma(x0) != 0");
    }
    if (times.empty()) throw std::invalid_argument("clt_empirical_check: empty times");
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) {
            throw std::invalid_argument("clt_empirical_check: times must be positive");
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw std::invalid_argument("clt_empirical_check: times must be increasing");
        }
    }
    if (n_paths < 40) {
        throw std::invalid_argument("clt_empirical_check: too few paths for batched SEs");
    }

    const double t_max = times.back();
    const RescaleSpec spec = make_rescale_spec(kernel, n, model.x);

    // Simulation grid on [0, t_max / n]; every requested time must sit on it.
    Grid grid{t_max / static_cast<double>(n), kCltSimulationSteps};
    std::vector<int> nodes;
    nodes.reserve(times.size());
    for (double ti : times) {
        const double exact = ti / t_max * kCltSimulationSteps;
        const int k = static_cast<int>(std::lround(exact));
        if (std::abs(exact - k) > 1e-9 || k < 1) {
            std::ostringstream msg;
            msg << "clt_empirical_check: time " << ti << " does not align with the "
                << kCltSimulationSteps << "-step grid";
            throw std::invalid_argument(msg.str());
        }
        nodes.push_back(k);
    }

    SimOptions options;
    options.store_nodes = nodes;
    const PathEnsemble ensemble = simulate_sve(model, kernel, grid, n_paths, seed, options);

    const int m = static_cast<int>(times.size());
    const double root_lam = std::sqrt(spec.lambda_n);

    // Batched means and covariances of the rescaled values.
    const int n_batches = 20;
    std::vector<double> mean_batch(static_cast<size_t>(n_batches) * m, 0.0);
    std::vector<double> cov_batch(static_cast<size_t>(n_batches) * m * m, 0.0);
    std::vector<std::int64_t> count(n_batches, 0);
    std::vector<double> z(m);
    for (std::int64_t p = 0; p < n_paths; ++p) {
        const int b = static_cast<int>(p * n_batches / n_paths);
        for (int i = 0; i < m; ++i) z[i] = root_lam * (ensemble.at(p, i) - model.x);
        for (int i = 0; i < m; ++i) {
            mean_batch[static_cast<size_t>(b) * m + i] += z[i];
            for (int j = 0; j <= i; ++j) {
                cov_batch[(static_cast<size_t>(b) * m + i) * m + j] += z[i] * z[j];
            }
        }
        ++count[b];
    }
    for (int b = 0; b < n_batches; ++b) {
        for (int i = 0; i < m; ++i) {
            mean_batch[static_cast<size_t>(b) * m + i] /= count[b];
            for (int j = 0; j <= i; ++j) {
                cov_batch[(static_cast<size_t>(b) * m + i) * m + j] /= count[b];
            }
        }
    }
    // Within-batch covariance: E[z_i z_j] - mean_i mean_j.
    for (int b = 0; b < n_batches; ++b) {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j <= i; ++j) {
                cov_batch[(static_cast<size_t>(b) * m + i) * m + j] -=
                    mean_batch[static_cast<size_t>(b) * m + i] *
                    mean_batch[static_cast<size_t>(b) * m + j];
            }
        }
    }

    auto batch_stats = [&](auto&& value_of_batch) {
        double mean = 0.0;
        for (int b = 0; b < n_batches; ++b) mean += value_of_batch(b);
        mean /= n_batches;
        double ss = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            const double d = value_of_batch(b) - mean;
            ss += d * d;
        }
        const double se = std::sqrt(ss / (n_batches - 1)) / std::sqrt(double(n_batches));
        return std::pair<double, double>(mean, se);
    };

    CltReport report;
    report.times = times;
    report.n = n;
    report.lambda_n = spec.lambda_n;
    const double s2 = sigma_x0 * sigma_x0;
    for (int i = 0; i < m; ++i) {
        const auto [est, se] = batch_stats(
            [&](int b) { return mean_batch[static_cast<size_t>(b) * m + i]; });
        CltEntry e;
        e.kind = "mean";
        e.t_i = times[i];
        e.t_j = times[i];
        e.empirical = est;
        e.limit = 0.0;
        e.se = se;
        e.within = std::abs(est) <= 3.0 * se + 1e-12;
        report.all_within = report.all_within && e.within;
        report.entries.push_back(e);
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            const auto [est, se] = batch_stats([&](int b) {
                return cov_batch[(static_cast<size_t>(b) * m + i) * m + j];
            });
            CltEntry e;
            e.kind = "cov";
            e.t_i = times[j];
            e.t_j = times[i];
            e.empirical = est;
            e.limit = s2 * limit_covariance(kernel, times[j], times[i]);
            e.se = se;
            e.within = std::abs(est - e.limit) <= 3.0 * se + 0.05 * std::abs(e.limit);
            report.all_within = report.all_within && e.within;
            report.entries.push_back(e);
        }
    }
    return report;
}

void write_clt_report_csv(const CltReport& report, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"kind", "t_i", "t_j", "empirical", "limit", "se", "verdict"});
    for (const auto& e : report.entries) {
        csv.row({e.kind, fmt_g17(e.t_i), fmt_g17(e.t_j), fmt_g17(e.empirical),
                 fmt_g17(e.limit), fmt_g17(e.se), e.within ? "within" : "outside"});
    }
}

}  // namespace sve
