#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sve/ensemble.hpp"
#include "sve/linalg.hpp"

namespace sve {

// Finite-dimensional law of the scaled power-kernel Gaussian process
// Y_t = scale * int_0^t (t-s)^(H-1/2) dB_s at a strictly increasing set of
// positive times.
struct GaussianFDD {
    std::vector<double> times;
    Matrix cov;
    double H = 0.5;
    double scale = 1.0;
};

// Unit-scale covariance E[Y_s Y_t]: for 0 < s <= t,
//   t^(H-1/2) s^(H+1/2) / (H+1/2) * 2F1(1/2-H, 1; H+3/2; s/t),
// symmetrized in (s,t); equals t^(2H)/(2H) on the diagonal.
double rl_covariance(double H, double s, double t);

GaussianFDD rl_fdd(double H, double scale, const std::vector<double>& times);

// Markov factorization residual c(s,u) c(t,t) - c(s,t) c(t,u) for
// 0 < s <= t <= u; identically zero iff the process is Markov (H = 1/2).
double doob_defect(double H, double s, double t, double u);

// Conditional law of component `target` given exact observations at other
// components. 1- and 2-observation cases use closed-form Schur complements in
// correlation-normalized variables (stable when covariance entries span many
// orders of magnitude); larger blocks go through Cholesky.
struct ConditionResult {
    double mean = 0.0;
    double variance = 0.0;
    double condition_estimate = 1.0;  // of the observed block
};
ConditionResult gaussian_condition(const GaussianFDD& fdd,
                                   const std::vector<std::pair<int, double>>& observed,
                                   int target);
// Always uses the general Cholesky path (validation twin of the closed forms).
ConditionResult gaussian_condition_general(
    const GaussianFDD& fdd, const std::vector<std::pair<int, double>>& observed,
    int target);

// Small-time asymptote of the two-point conditional mean at times
// (tau, tau^2, tau^3) with observations (Y_{tau^2}, Y_{tau^3}) = (0, delta):
//   delta * 4H(1-2H)/(2H+1)^2 * tau^(1-2H).
double cond_mean_asymptote(double H, double tau, double delta);

// Witness that conditioning on the extra, older observation moves the
// conditional law: P[Y_b3 in I | Y_b2 = 0, Y_b1 = delta] exceeds
// P[Y_b3 in I | Y_b2 = 0] by `margin` at times (b1, b2, b3) = (tau^3, tau^2,
// tau).
struct NonMarkovCertificate {
    double H = 0.0;
    double tau = 0.0;
    std::array<double, 3> beta_times{};  // (tau^3, tau^2, tau), increasing
    double delta = 1.0;
    double lo = 0.0, hi = 0.0;  // the interval I
    std::string interval_rule;  // "centered" or "crossing"
    double p_two_cond = 0.0;
    double p_one_cond = 0.0;
    double margin = 0.0;

    std::string report() const;  // structured text block
};

struct CertificateSearchConfig {
    double margin_min = 0.01;
    int k_min = 3;   // tau grid: 2^-k, k = k_min..k_max
    int k_max = 20;
    double delta = 1.0;
};

// Searches the geometric tau grid; per tau tries the centered one-sigma
// interval around the two-point conditional mean first, then a one-sided
// interval anchored at the likelihood crossing (needed when a small mean
// shift cannot move a centered interval's mass by margin_min). Returns the
// first hit; throws SearchExhaustedError (carrying the best margin) when the
// grid is exhausted — as it must be for H = 1/2.
NonMarkovCertificate lemma31_certificate(double H,
                                         const CertificateSearchConfig& config = {});

// Exact joint Gaussian samples at the given times via the Cholesky factor;
// one stream per path, deterministic in (seed, path, time index).
PathEnsemble sample_gaussian_paths(double H, double scale,
                                   const std::vector<double>& times,
                                   std::int64_t n_paths, std::uint64_t seed);

}  // namespace sve
