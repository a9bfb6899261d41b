#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sve/affine_moments.hpp"
#include "sve/kernels.hpp"

namespace sve {

// Small-time zoom h_n(y) = sqrt(lambda_n) (y - x0), lambda_n from the kernel.
struct RescaleSpec {
    long n = 1;
    double x0 = 0.0;
    double lambda_n = 1.0;
};
RescaleSpec make_rescale_spec(const KernelSpec& kernel, long n, double x0);

double rescale(const RescaleSpec& spec, double y);
double rescale_inverse(const RescaleSpec& spec, double z);

// Row of the covariance-convergence table:
//   finite_n = lambda_n * int_0^(s/n) K((t-s)/n + r) K(r) dr
//   limit    = int_0^s Kbar(t-s+r) Kbar(r) dr  (Kbar from limit_kernel)
struct CovLimitRow {
    long n = 0;
    double finite_n_value = 0.0;
    double limit_value = 0.0;
};
std::vector<CovLimitRow> covariance_limit_check(const KernelSpec& kernel, double s,
                                                double t,
                                                const std::vector<long>& n_list);

// One compared entry of the rescaled-ensemble report; mean entries carry
// kind "mean" (limit 0), covariance entries kind "cov".
struct CltEntry {
    std::string kind;
    double t_i = 0.0;
    double t_j = 0.0;
    double empirical = 0.0;
    double limit = 0.0;
    double se = 0.0;
    bool within = false;
};

struct CltReport {
    std::vector<double> times;
    long n = 1;
    double lambda_n = 1.0;
    std::vector<CltEntry> entries;
    bool all_within = true;
};

// Simulates the model on [0, max(times)/n] (500 steps), rescales the stored
// nodes, and compares empirical means (against 0) and covariances (against
// sigma(x0)^2 * limit covariance) entrywise: |difference| must be inside
// 3 SE + 5% |limit|. Times must align with the 500-step grid.
CltReport clt_empirical_check(const ModelSpec& model, const KernelSpec& kernel,
                              const std::vector<double>& times, long n,
                              std::int64_t n_paths, std::uint64_t seed);

void write_clt_report_csv(const CltReport& report, const std::string& path);

// Step count of the zoomed-in simulation grid (relative resolution is what
// matters for the rescaled process).
inline constexpr int kCltSimulationSteps = 500;

}  // namespace sve
