#pragma once

#include <cstdint>
#include <vector>

#include "sve/affine_moments.hpp"
#include "sve/ensemble.hpp"
#include "sve/kernels.hpp"
#include "sve/volterra.hpp"

namespace sve {

struct SimOptions {
    int threads = 1;
    // Node indices (0..N) to keep in the ensemble; empty keeps every node.
    std::vector<int> store_nodes;
    double overflow_guard = 1e12;
};

// Left-point Euler with integrated-kernel weights:
//   X_k = x e^(-lambda t_k)
//       + sum_{j<k} [ b(X_j) + sigma(trunc(X_j)) dB_j / h ] * M0[k-j],
// M0[d] = int over [(d-1)h, dh] of K. The recursion carries the raw state;
// the ensemble stores the truncated one (so nonnegative state spaces hold
// their invariant in stored data). Increments are counter-based: path p,
// step j is seed-addressable, and results are bit-identical for any thread
// count.
PathEnsemble simulate_sve(const ModelSpec& model, const KernelSpec& kernel,
                          const Grid& grid, std::int64_t n_paths,
                          std::uint64_t seed, const SimOptions& options = {});

struct MomentEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

// Sample mean of values^order at one stored node, order in {1, 2}; the
// standard error comes from 20 contiguous path batches.
MomentEstimate empirical_moment(const PathEnsemble& ensemble, int time_index,
                                int order);

struct BinCondition {
    int time_index = 0;
    double center = 0.0;
    double half_width = 0.0;
};

struct CondProbResult {
    double probability = 0.0;
    double ci_half_width = 0.0;  // Wilson 95%
    long n_effective = 0;
};

// Empirical frequency of X[target] in [target_lo, target_hi] among the paths
// inside every conditioning bin; throws InsufficientMassError when fewer than
// min_effective paths qualify.
CondProbResult conditional_prob_estimate(const PathEnsemble& ensemble,
                                         const std::vector<BinCondition>& conditioning,
                                         int target_index, double target_lo,
                                         double target_hi, long min_effective = 200);

struct SdeComparisonRow {
    int n_steps = 0;
    double mean_max_deviation = 0.0;
};

// For an exponential kernel, runs the kernel-weight scheme and a plain Euler
// scheme of the equivalent SDE
//   dX = (K(0) b(X) - lambda X) dt + K(0) sigma(X) dB
// on shared increments, and reports the mean over paths of the pathwise max
// deviation for each step count (expected ~O(h)).
std::vector<SdeComparisonRow> sde_consistency_check(
    const ModelSpec& model, const KernelSpec& kernel,
    const std::vector<int>& step_counts, double T, std::int64_t n_paths,
    std::uint64_t seed);

}  // namespace sve
