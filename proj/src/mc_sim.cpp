#include "sve/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sve/errors.hpp"
#include "sve/rng.hpp"

namespace sve {
namespace {

double truncate_state(const ModelSpec& model, double y) {
    switch (model.state_space) {
        case StateSpace::AllReals:
            return y;
        case StateSpace::NonnegativeReals:
            return std::max(y, 0.0);
        case StateSpace::Interval:
            return std::min(std::max(y, model.alpha1), model.alpha2);
    }
    return y;
}

struct SchemeInputs {
    const ModelSpec* model;
    const KernelSpec* kernel;
    Grid grid;
    std::vector<double> M0;       // lag masses, index 1..N
    std::vector<double> initial;  // x e^(-lambda t_k), k = 0..N
    double overflow_guard;
};

SchemeInputs prepare_scheme(const ModelSpec& model, const KernelSpec& kernel,
                            const Grid& grid, double overflow_guard) {
    model.validate();
    grid.validate();
    SchemeInputs in;
    in.model = &model;
    in.kernel = &kernel;
    in.grid = grid;
    in.M0 = kernel_lag_moments(kernel, grid).M0;
    in.initial.resize(grid.N + 1);
    for (int k = 0; k <= grid.N; ++k) {
        in.initial[k] = model.x * std::exp(-model.lambda * grid.node(k));
    }
    in.overflow_guard = overflow_guard;
    return in;
}

// One path of the kernel-weight scheme. raw/trunc have size N+1; fused has
// size N and carries b(X_j) + sigma(trunc(X_j)) dB_j / h.
void run_one_path(const SchemeInputs& in, std::uint64_t seed, std::uint64_t path,
                  std::vector<double>& raw, std::vector<double>& trunc,
                  std::vector<double>& fused) {
    const ModelSpec& model = *in.model;
    const int N = in.grid.N;
    const double h = in.grid.h();
    const double sqrt_h = std::sqrt(h);
    const double* M0 = in.M0.data();
    raw[0] = model.x;
    trunc[0] = truncate_state(model, model.x);
    for (int k = 1; k <= N; ++k) {
        const int j = k - 1;
        const double db = sqrt_h * rng_normal(seed, path, static_cast<std::uint64_t>(j));
        fused[j] = model.b0 + model.beta * raw[j] + model.sigma_at(trunc[j]) * db / h;
        double acc = 0.0;
        const double* c = fused.data();
        for (int d = 1; d <= k; ++d) acc += M0[d] * c[k - d];
        raw[k] = in.initial[k] + acc;
        if (!(std::abs(raw[k]) <= in.overflow_guard)) {
            std::ostringstream msg;
            msg << "simulate_sve: |state| exceeded the overflow guard "
                << in.overflow_guard << " at path " << path << ", node " << k;
            throw OverflowError(msg.str());
        }
        trunc[k] = truncate_state(model, raw[k]);
    }
}

}  // namespace

PathEnsemble simulate_sve(const ModelSpec& model, const KernelSpec& kernel,
                          const Grid& grid, std::int64_t n_paths,
                          std::uint64_t seed, const SimOptions& options) {
    if (n_paths < 0) throw std::invalid_argument("simulate_sve: n_paths < 0");
    const SchemeInputs in = prepare_scheme(model, kernel, grid, options.overflow_guard);

    std::vector<int> nodes = options.store_nodes;
    if (nodes.empty()) {
        nodes.resize(grid.N + 1);
        for (int k = 0; k <= grid.N; ++k) nodes[k] = k;
    }
    for (int k : nodes) {
        if (k < 0 || k > grid.N) {
            throw std::invalid_argument("simulate_sve: store node index out of range");
        }
    }

    PathEnsemble e;
    e.n_paths = n_paths;
    e.seed = seed;
    e.scheme_id = "sve-leftpoint-kernelweights-fulltrunc-v1";
    e.model_id = "affine";
    e.kernel_id = kernel.id();
    e.times.reserve(nodes.size());
    for (int k : nodes) e.times.push_back(grid.node(k));
    e.values.assign(static_cast<size_t>(n_paths) * nodes.size(), 0.0);

    const int n_nodes = static_cast<int>(nodes.size());
    auto worker = [&](std::int64_t lo, std::int64_t hi) {
        std::vector<double> raw(grid.N + 1), trunc(grid.N + 1), fused(grid.N);
        for (std::int64_t p = lo; p < hi; ++p) {
            run_one_path(in, seed, static_cast<std::uint64_t>(p), raw, trunc, fused);
            double* row = e.values.data() + static_cast<size_t>(p) * n_nodes;
            for (int i = 0; i < n_nodes; ++i) row[i] = trunc[nodes[i]];
        }
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1 || n_paths < 2 * threads) {
        worker(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t block = (n_paths + threads - 1) / threads;
        std::exception_ptr first_error;
        std::mutex error_mutex;
        for (int t = 0; t < threads; ++t) {
            const std::int64_t lo = t * block;
            const std::int64_t hi = std::min<std::int64_t>(n_paths, lo + block);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                try {
                    worker(lo, hi);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    return e;
}

MomentEstimate empirical_moment(const PathEnsemble& ensemble, int time_index,
                                int order) {
    if (time_index < 0 || time_index >= ensemble.n_times()) {
        throw std::invalid_argument("empirical_moment: time index out of range");
    }
    if (order != 1 && order != 2) {
        throw std::invalid_argument("empirical_moment: order must be 1 or 2");
    }
    const std::int64_t n = ensemble.n_paths;
    if (n < 2) throw std::invalid_argument("empirical_moment: needs n_paths >= 2");

    const int n_batches = static_cast<int>(std::min<std::int64_t>(20, n));
    std::vector<double> batch_mean(n_batches, 0.0);
    std::vector<std::int64_t> batch_count(n_batches, 0);
    double total = 0.0;
    for (std::int64_t p = 0; p < n; ++p) {
        double v = ensemble.at(p, time_index);
        if (order == 2) v *= v;
        const int b = static_cast<int>(p * n_batches / n);
        batch_mean[b] += v;
        ++batch_count[b];
        total += v;
    }
    for (int b = 0; b < n_batches; ++b) batch_mean[b] /= batch_count[b];
    MomentEstimate r;
    r.estimate = total / n;
    double ss = 0.0;
    for (int b = 0; b < n_batches; ++b) {
        const double d = batch_mean[b] - r.estimate;
        ss += d * d;
    }
    // sd of batch means over sqrt(#batches): SE of the grand mean.
    r.standard_error = std::sqrt(ss / (n_batches - 1)) / std::sqrt(double(n_batches));
    return r;
}

CondProbResult conditional_prob_estimate(const PathEnsemble& ensemble,
                                         const std::vector<BinCondition>& conditioning,
                                         int target_index, double target_lo,
                                         double target_hi, long min_effective) {
    if (target_index < 0 || target_index >= ensemble.n_times()) {
        throw std::invalid_argument("conditional_prob_estimate: target index out of range");
    }
    if (!(target_lo <= target_hi)) {
        throw std::invalid_argument("conditional_prob_estimate: empty target interval");
    }
    for (const auto& c : conditioning) {
        if (c.time_index < 0 || c.time_index >= ensemble.n_times()) {
            throw std::invalid_argument("conditional_prob_estimate: condition index out of range");
        }
        if (!(c.half_width > 0.0)) {
            throw std::invalid_argument("conditional_prob_estimate: half_width must be > 0");
        }
    }
    long n_eff = 0, hits = 0;
    for (std::int64_t p = 0; p < ensemble.n_paths; ++p) {
        bool inside = true;
        for (const auto& c : conditioning) {
            if (std::abs(ensemble.at(p, c.time_index) - c.center) > c.half_width) {
                inside = false;
                break;
            }
        }
        if (!inside) continue;
        ++n_eff;
        const double v = ensemble.at(p, target_index);
        if (v >= target_lo && v <= target_hi) ++hits;
    }
    if (n_eff < min_effective) {
        std::ostringstream msg;
        msg << "conditional_prob_estimate: only " << n_eff
            << " paths satisfy the conditioning (need " << min_effective << ")";
        throw InsufficientMassError(msg.str(), n_eff);
    }
    CondProbResult r;
    r.n_effective = n_eff;
    const double n = static_cast<double>(n_eff);
    const double p_hat = static_cast<double>(hits) / n;
    r.probability = p_hat;
    const double z = 1.959963984540054;  // 97.5% normal quantile
    const double z2 = z * z;
    r.ci_half_width =
        z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    return r;
}

std::vector<SdeComparisonRow> sde_consistency_check(
    const ModelSpec& model, const KernelSpec& kernel,
    const std::vector<int>& step_counts, double T, std::int64_t n_paths,
    std::uint64_t seed) {
    if (kernel.kind != KernelKind::Exponential && kernel.kind != KernelKind::Constant) {
        throw UnsupportedKindError(
            "sde_consistency_check: the matching SDE exists for exponential (or "
            "constant) kernels only");
    }
    if (n_paths < 1) throw std::invalid_argument("sde_consistency_check: n_paths < 1");
    const double K0 = kernel_eval(kernel, 0.0);
    std::vector<SdeComparisonRow> rows;
    for (int N : step_counts) {
        Grid grid{T, N};
        const SchemeInputs in = prepare_scheme(model, kernel, grid, 1e12);
        const double h = grid.h();
        const double sqrt_h = std::sqrt(h);
        std::vector<double> raw(N + 1), trunc(N + 1), fused(N);
        double dev_sum = 0.0;
        for (std::int64_t p = 0; p < n_paths; ++p) {
            run_one_path(in, seed, static_cast<std::uint64_t>(p), raw, trunc, fused);
            // Plain Euler for dX = (K0 b(X) - lambda X) dt + K0 sigma(X) dB on
            // the same increments.
            double y = model.x;
            double dev = 0.0;
            for (int k = 1; k <= N; ++k) {
                const double db =
                    sqrt_h * rng_normal(seed, static_cast<std::uint64_t>(p),
                                        static_cast<std::uint64_t>(k - 1));
                const double drift = K0 * (model.b0 + model.beta * y) - model.lambda * y;
                y += drift * h + K0 * model.sigma_at(truncate_state(model, y)) * db;
                dev = std::max(dev, std::abs(raw[k] - y));
            }
            dev_sum += dev;
        }
        rows.push_back({N, dev_sum / static_cast<double>(n_paths)});
    }
    return rows;
}

}  // namespace sve
