#include "sve/gaussian_rl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sve/errors.hpp"
#include "sve/io.hpp"
#include "sve/kernels.hpp"
#include "sve/rng.hpp"
#include "sve/special_functions.hpp"

namespace sve {
namespace {

void require_positive_h(double H, const char* who) {
    if (!(H > 0.0)) {
        std::ostringstream msg;
        msg << who << ": requires H > 0, got " << H;
        throw std::invalid_argument(msg.str());
    }
}

struct TwoPointConditional {
    double mean = 0.0;
    double variance = 0.0;
    double condition = 1.0;
};

// Conditional of component g given exact values (za, zb) at components a, b,
// computed in correlation-normalized variables: with
//   u_i = theta_{gi} / sqrt(theta_ii),  zeta_i = z_i / sqrt(theta_ii),
//   rho = theta_ab / sqrt(theta_aa theta_bb),
// mean = [u_a (zeta_a - rho zeta_b) + u_b (zeta_b - rho zeta_a)] / (1 - rho^2)
// var  = theta_gg - [u_a^2 - 2 rho u_a u_b + u_b^2] / (1 - rho^2).
TwoPointConditional schur_two_point(double taa, double tbb, double tab,
                                    double tga, double tgb, double tgg,
                                    double za, double zb) {
    const double sa = std::sqrt(taa), sb = std::sqrt(tbb);
    const double rho = tab / (sa * sb);
    const double denom = 1.0 - rho * rho;
    if (!(std::abs(denom) > 1e-12)) {
        std::ostringstream msg;
        msg << "gaussian_condition: observation block singular (|1 - rho^2| = "
            << std::abs(denom) << ")";
        throw SingularBlockError(msg.str());
    }
    const double ua = tga / sa, ub = tgb / sb;
    const double zeta_a = za / sa, zeta_b = zb / sb;
    TwoPointConditional r;
    r.mean = (ua * (zeta_a - rho * zeta_b) + ub * (zeta_b - rho * zeta_a)) / denom;
    r.variance = tgg - (ua * ua - 2.0 * rho * ua * ub + ub * ub) / denom;
    r.condition = (1.0 + std::abs(rho)) / (1.0 - std::abs(rho));
    return r;
}

void validate_condition_args(const GaussianFDD& fdd,
                             const std::vector<std::pair<int, double>>& observed,
                             int target, const char* who) {
    const int n = static_cast<int>(fdd.times.size());
    auto check_index = [&](int i) {
        if (i < 0 || i >= n) {
            std::ostringstream msg;
            msg << who << ": index " << i << " out of range [0, " << n << ")";
            throw std::invalid_argument(msg.str());
        }
    };
    check_index(target);
    if (observed.empty()) {
        throw std::invalid_argument(std::string(who) + ": needs at least one observation");
    }
    for (const auto& [idx, value] : observed) {
        (void)value;
        check_index(idx);
        if (idx == target) {
            throw std::invalid_argument(std::string(who) +
                                        ": target coincides with an observation");
        }
    }
}

}  // namespace

double rl_covariance(double H, double s, double t) {
    require_positive_h(H, "rl_covariance");
    if (!(s > 0.0) || !(t > 0.0)) {
        throw std::invalid_argument("rl_covariance: requires s, t > 0");
    }
    if (s > t) std::swap(s, t);
    const double x = s / t;
    const double f = hyp2f1(0.5 - H, 1.0, H + 1.5, x);
    return std::pow(t, H - 0.5) * std::pow(s, H + 0.5) / (H + 0.5) * f;
}

GaussianFDD rl_fdd(double H, double scale, const std::vector<double>& times) {
    require_positive_h(H, "rl_fdd");
    const int n = static_cast<int>(times.size());
    for (int i = 0; i < n; ++i) {
        if (!(times[i] > 0.0)) {
            throw std::invalid_argument("rl_fdd: times must be positive");
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw std::invalid_argument("rl_fdd: times must be strictly increasing");
        }
    }
    GaussianFDD fdd;
    fdd.times = times;
    fdd.H = H;
    fdd.scale = scale;
    fdd.cov = Matrix(n);
    const double s2 = scale * scale;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double c = s2 * rl_covariance(H, times[j], times[i]);
            fdd.cov.at(i, j) = c;
            fdd.cov.at(j, i) = c;
        }
    }
    return fdd;
}

double doob_defect(double H, double s, double t, double u) {
    require_positive_h(H, "doob_defect");
    if (!(0.0 < s && s <= t && t <= u)) {
        throw std::invalid_argument("doob_defect: requires 0 < s <= t <= u");
    }
    return rl_covariance(H, s, u) * rl_covariance(H, t, t) -
           rl_covariance(H, s, t) * rl_covariance(H, t, u);
}

ConditionResult gaussian_condition(const GaussianFDD& fdd,
                                   const std::vector<std::pair<int, double>>& observed,
                                   int target) {
    validate_condition_args(fdd, observed, target, "gaussian_condition");
    const auto& th = fdd.cov;
    if (observed.size() == 1) {
        const auto [a, za] = observed[0];
        ConditionResult r;
        r.mean = th.at(target, a) * za / th.at(a, a);
        r.variance = th.at(target, target) - th.at(target, a) * th.at(target, a) / th.at(a, a);
        r.condition_estimate = 1.0;
        return r;
    }
    if (observed.size() == 2) {
        const auto [a, za] = observed[0];
        const auto [b, zb] = observed[1];
        const auto two = schur_two_point(th.at(a, a), th.at(b, b), th.at(a, b),
                                         th.at(target, a), th.at(target, b),
                                         th.at(target, target), za, zb);
        ConditionResult r;
        r.mean = two.mean;
        r.variance = two.variance;
        r.condition_estimate = two.condition;
        return r;
    }
    return gaussian_condition_general(fdd, observed, target);
}

ConditionResult gaussian_condition_general(
    const GaussianFDD& fdd, const std::vector<std::pair<int, double>>& observed,
    int target) {
    validate_condition_args(fdd, observed, target, "gaussian_condition_general");
    const auto& th = fdd.cov;
    const int m = static_cast<int>(observed.size());
    // Correlation-normalized observation block.
    std::vector<double> sd(m);
    for (int i = 0; i < m; ++i) sd[i] = std::sqrt(th.at(observed[i].first, observed[i].first));
    Matrix block(m);
    std::vector<double> u(m), zeta(m);
    for (int i = 0; i < m; ++i) {
        const int oi = observed[i].first;
        u[i] = th.at(target, oi) / sd[i];
        zeta[i] = observed[i].second / sd[i];
        for (int j = 0; j < m; ++j) {
            block.at(i, j) = th.at(oi, observed[j].first) / (sd[i] * sd[j]);
        }
    }
    const CholeskyResult factor = cholesky(block);
    if (!factor.ok) {
        std::ostringstream msg;
        msg << "gaussian_condition_general: observation block singular at pivot "
            << factor.failed_index;
        throw SingularBlockError(msg.str());
    }
    const auto solved_z = cholesky_solve(factor, zeta);
    const auto solved_u = cholesky_solve(factor, u);
    ConditionResult r;
    for (int i = 0; i < m; ++i) {
        r.mean += u[i] * solved_z[i];
        r.variance += u[i] * solved_u[i];
    }
    r.variance = th.at(target, target) - r.variance;
    r.condition_estimate = cholesky_condition_estimate(factor);
    return r;
}

double cond_mean_asymptote(double H, double tau, double delta) {
    require_positive_h(H, "cond_mean_asymptote");
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::invalid_argument("cond_mean_asymptote: requires tau in (0, 1)");
    }
    const double twoH = 2.0 * H;
    return delta * 4.0 * H * (1.0 - twoH) / ((twoH + 1.0) * (twoH + 1.0)) *
           std::pow(tau, 1.0 - twoH);
}

std::string NonMarkovCertificate::report() const {
    std::ostringstream out;
    out << "non-markov certificate\n"
        << "H: " << fmt_g17(H) << "\n"
        << "tau: " << fmt_g17(tau) << "\n"
        << "beta_times: " << fmt_g17(beta_times[0]) << " " << fmt_g17(beta_times[1])
        << " " << fmt_g17(beta_times[2]) << "\n"
        << "delta: " << fmt_g17(delta) << "\n"
        << "interval: [" << fmt_g17(lo) << ", " << fmt_g17(hi) << "] ("
        << interval_rule << ")\n"
        << "p_two_cond: " << fmt_g17(p_two_cond) << "\n"
        << "p_one_cond: " << fmt_g17(p_one_cond) << "\n"
        << "margin: " << fmt_g17(margin) << "\n";
    return out.str();
}

NonMarkovCertificate lemma31_certificate(double H,
                                         const CertificateSearchConfig& config) {
    require_positive_h(H, "lemma31_certificate");
    if (config.k_min < 1 || config.k_max < config.k_min) {
        throw std::invalid_argument("lemma31_certificate: bad tau grid bounds");
    }
    double best_margin = -1.0;
    for (int k = config.k_min; k <= config.k_max; ++k) {
        const double tau = std::ldexp(1.0, -k);
        const double t1 = tau, t2 = tau * tau, t3 = tau * tau * tau;
        const double t11 = rl_covariance(H, t1, t1);
        const double t22 = rl_covariance(H, t2, t2);
        const double t33 = rl_covariance(H, t3, t3);
        const double t12 = rl_covariance(H, t2, t1);
        const double t13 = rl_covariance(H, t3, t1);
        const double t23 = rl_covariance(H, t3, t2);
        // Two-point conditional of Y_{t1} given Y_{t2} = 0, Y_{t3} = delta.
        const auto two =
            schur_two_point(t22, t33, t23, t12, t13, t11, 0.0, config.delta);
        const double m2 = two.mean;
        const double s2 = std::sqrt(two.variance);
        // One-point conditional given Y_{t2} = 0 is centered.
        const double s1 = std::sqrt(t11 - t12 * t12 / t22);

        struct Candidate {
            const char* rule;
            double lo, hi;
        };
        Candidate candidates[2];
        candidates[0] = {"centered", m2 - s2, m2 + s2};
        if (m2 >= 0.0) {
            candidates[1] = {"crossing", 0.5 * m2, m2 + 8.0 * s2};
        } else {
            candidates[1] = {"crossing", m2 - 8.0 * s2, 0.5 * m2};
        }
        for (const auto& cand : candidates) {
            const double p_two = normal_cdf((cand.hi - m2) / s2) -
                                 normal_cdf((cand.lo - m2) / s2);
            const double p_one = normal_cdf(cand.hi / s1) - normal_cdf(cand.lo / s1);
            const double margin = p_two - p_one;
            best_margin = std::max(best_margin, margin);
            if (margin > config.margin_min) {
                NonMarkovCertificate cert;
                cert.H = H;
                cert.tau = tau;
                cert.beta_times = {t3, t2, t1};
                cert.delta = config.delta;
                cert.lo = cand.lo;
                cert.hi = cand.hi;
                cert.interval_rule = cand.rule;
                cert.p_two_cond = p_two;
                cert.p_one_cond = p_one;
                cert.margin = margin;
                return cert;
            }
        }
    }
    std::ostringstream msg;
    msg << "lemma31_certificate: no (tau, interval) with margin > "
        << config.margin_min << " on the 2^-k grid, k = " << config.k_min << ".."
        << config.k_max << "; best margin " << best_margin;
    throw SearchExhaustedError(msg.str(), best_margin);
}

PathEnsemble sample_gaussian_paths(double H, double scale,
                                   const std::vector<double>& times,
                                   std::int64_t n_paths, std::uint64_t seed) {
    if (n_paths < 0) throw std::invalid_argument("sample_gaussian_paths: n_paths < 0");
    const GaussianFDD fdd = rl_fdd(H, scale, times);
    const CholeskyResult factor = cholesky(fdd.cov);
    if (!factor.ok) {
        std::ostringstream msg;
        msg << "sample_gaussian_paths: covariance numerically indefinite at pivot "
            << factor.failed_index;
        throw Error(msg.str());
    }
    const int n = static_cast<int>(times.size());
    PathEnsemble e;
    e.times = times;
    e.n_paths = n_paths;
    e.seed = seed;
    e.scheme_id = "gaussian-cholesky-exact";
    e.model_id = "centered-gaussian";
    e.kernel_id = KernelSpec::fractional(H, scale).id();
    e.values.assign(static_cast<size_t>(n_paths) * n, 0.0);
    std::vector<double> z(n);
    for (std::int64_t p = 0; p < n_paths; ++p) {
        for (int i = 0; i < n; ++i) {
            z[i] = rng_normal(seed, static_cast<std::uint64_t>(p), i);
        }
        double* row = e.values.data() + static_cast<size_t>(p) * n;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j <= i; ++j) acc += factor.L.at(i, j) * z[j];
            row[i] = acc;
        }
    }
    return e;
}

}  // namespace sve
