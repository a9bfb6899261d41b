#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sve/ensemble.hpp"
#include "sve/errors.hpp"
#include "sve/mc_sim.hpp"

using namespace sve;

namespace {

ModelSpec decay_model(double x, double b0, double beta, double sigma0,
                      DiffusionKind kind = DiffusionKind::ConstantVol) {
    ModelSpec m;
    m.x = x;
    m.b0 = b0;
    m.beta = beta;
    m.sigma0 = sigma0;
    m.diffusion = kind;
    if (kind == DiffusionKind::SqrtVol) m.state_space = StateSpace::NonnegativeReals;
    return m;
}

PathEnsemble tiny_ensemble() {
    PathEnsemble e;
    e.times = {1.0};
    e.values = {1.0, 2.0, 3.0, 4.0};
    e.n_paths = 4;
    e.seed = 7;
    e.scheme_id = "hand";
    e.model_id = "hand";
    e.kernel_id = "hand";
    return e;
}

}  // namespace

TEST_CASE("noise-free simulation reproduces the mean-reversion ODE") {
    ModelSpec m = decay_model(0.0, 1.0, -1.0, 0.0);
    Grid g{1.0, 1000};
    PathEnsemble e = simulate_sve(m, KernelSpec::constant(1.0), g, 3, 11);
    REQUIRE(e.n_times() == g.N + 1);
    // X' = 1 - X from 0: X(t) = 1 - e^{-t}; left-point stepping is O(h).
    for (int node : {250, 500, 1000}) {
        const double t = g.node(node);
        CHECK(e.at(0, node) == doctest::Approx(1.0 - std::exp(-t)).epsilon(2e-3));
    }
    // Without diffusion every path is the same trajectory.
    for (int node : {1, 999}) CHECK(e.at(0, node) == e.at(2, node));
    CHECK(e.at(0, 0) == 0.0);
    CHECK(e.scheme_id == "sve-leftpoint-kernelweights-fulltrunc-v1");
    CHECK(e.kernel_id == KernelSpec::constant(1.0).id());
    CHECK(e.seed == 11);
}

TEST_CASE("thread count never changes the sampled values") {
    ModelSpec m = decay_model(1.0, 0.5, -1.0, 0.3);
    Grid g{1.0, 32};
    KernelSpec k = KernelSpec::exponential(2.0, 0.5);
    SimOptions one, four;
    one.threads = 1;
    four.threads = 4;
    PathEnsemble a = simulate_sve(m, k, g, 64, 505, one);
    PathEnsemble b = simulate_sve(m, k, g, 64, 505, four);
    REQUIRE(a.values.size() == b.values.size());
    CHECK(a.values == b.values);  // bitwise

    PathEnsemble c = simulate_sve(m, k, g, 64, 506, one);
    CHECK(a.values != c.values);
}

TEST_CASE("stored-node subsets are column slices of the full run") {
    ModelSpec m = decay_model(1.0, 0.5, -1.0, 0.3);
    Grid g{1.0, 32};
    KernelSpec k = KernelSpec::exponential(2.0, 0.5);
    PathEnsemble full = simulate_sve(m, k, g, 16, 99);
    SimOptions opts;
    opts.store_nodes = {0, 7, 32};
    PathEnsemble sub = simulate_sve(m, k, g, 16, 99, opts);
    REQUIRE(sub.n_times() == 3);
    CHECK(sub.times[1] == g.node(7));
    for (std::int64_t p = 0; p < 16; ++p)
        for (int i = 0; i < 3; ++i)
            CHECK(sub.at(p, i) == full.at(p, opts.store_nodes[i]));

    SimOptions bad;
    bad.store_nodes = {0, 33};
    CHECK_THROWS_AS(simulate_sve(m, k, g, 4, 99, bad), std::invalid_argument);
}

TEST_CASE("state-space invariants hold in stored data") {
    Grid g{1.0, 128};

    ModelSpec cir = decay_model(0.04, 0.4, -2.0, 0.5, DiffusionKind::SqrtVol);
    PathEnsemble e = simulate_sve(cir, KernelSpec::constant(1.0), g, 200, 314);
    for (std::int64_t p = 0; p < e.n_paths; ++p)
        for (int i = 0; i < e.n_times(); ++i) CHECK(e.at(p, i) >= 0.0);

    ModelSpec jac;
    jac.x = 0.5;
    jac.b0 = 0.1;
    jac.beta = -0.2;
    jac.diffusion = DiffusionKind::Jacobi;
    jac.state_space = StateSpace::Interval;
    jac.alpha1 = 0.0;
    jac.alpha2 = 1.0;
    PathEnsemble j = simulate_sve(jac, KernelSpec::constant(1.0), g, 100, 217);
    for (std::int64_t p = 0; p < j.n_paths; ++p)
        for (int i = 0; i < j.n_times(); ++i) {
            CHECK(j.at(p, i) >= 0.0);
            CHECK(j.at(p, i) <= 1.0);
        }
}

TEST_CASE("runaway drift trips the overflow guard") {
    ModelSpec m = decay_model(1.0, 0.0, 40.0, 0.0);
    Grid g{1.0, 100};
    CHECK_THROWS_AS(simulate_sve(m, KernelSpec::constant(1.0), g, 1, 1),
                    OverflowError);
}

TEST_CASE("invalid model specifications are rejected before sampling") {
    ModelSpec bad = decay_model(-1.0, 0.0, 0.0, 0.5, DiffusionKind::SqrtVol);
    Grid g{1.0, 16};
    CHECK_THROWS_AS(simulate_sve(bad, KernelSpec::constant(1.0), g, 4, 1),
                    std::invalid_argument);
}

TEST_CASE("moment estimator: exact values on a hand ensemble") {
    PathEnsemble e = tiny_ensemble();

    MomentEstimate m1 = empirical_moment(e, 0, 1);
    CHECK(m1.estimate == doctest::Approx(2.5).epsilon(1e-15));
    // 4 batches of one path each: SE = sd{1,2,3,4} / sqrt(4).
    CHECK(m1.standard_error ==
          doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));

    MomentEstimate m2 = empirical_moment(e, 0, 2);
    CHECK(m2.estimate == doctest::Approx(7.5).epsilon(1e-15));
    CHECK(m2.standard_error == doctest::Approx(std::sqrt(43.0) / 2.0).epsilon(1e-14));

    CHECK_THROWS_AS(empirical_moment(e, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(empirical_moment(e, 0, 3), std::invalid_argument);
    PathEnsemble single = e;
    single.n_paths = 1;
    single.values = {1.0};
    CHECK_THROWS_AS(empirical_moment(single, 0, 1), std::invalid_argument);
}

TEST_CASE("conditional probability estimator on hand-placed paths") {
    PathEnsemble e;
    e.times = {0.5, 1.0};
    e.n_paths = 6;
    // (value at t0, value at t1) per path.
    e.values = {0.5, 1.0,   //
                0.9, 3.0,   //
                2.0, 1.0,   //
                -0.5, 0.0,  //
                -2.0, 1.0,  //
                1.0, 2.0};

    std::vector<BinCondition> cond{{0, 0.0, 1.0}};
    CondProbResult r = conditional_prob_estimate(e, cond, 1, 0.0, 2.0, 1);
    CHECK(r.n_effective == 4);
    CHECK(r.probability == doctest::Approx(0.75).epsilon(1e-15));
    const double z = 1.959963984540054;
    const double expected_ci = z *
                               std::sqrt(0.75 * 0.25 / 4.0 + z * z / 64.0) /
                               (1.0 + z * z / 4.0);
    CHECK(r.ci_half_width == doctest::Approx(expected_ci).epsilon(1e-14));

    // Conjunction of bins: adding a second bin can only drop paths.
    std::vector<BinCondition> both{{0, 0.0, 1.0}, {1, 1.0, 1.01}};
    CondProbResult r2 = conditional_prob_estimate(e, both, 1, 0.0, 2.0, 1);
    CHECK(r2.n_effective == 3);  // paths (0.5,1), (-0.5,0), (1,2)
    CHECK(r2.probability == doctest::Approx(1.0).epsilon(1e-15));

    // Unconditional mode: empty conditioning keeps every path.
    CondProbResult all = conditional_prob_estimate(e, {}, 1, 0.0, 2.0, 1);
    CHECK(all.n_effective == 6);

    bool threw = false;
    try {
        conditional_prob_estimate(e, cond, 1, 0.0, 2.0, 5);
    } catch (const InsufficientMassError& err) {
        threw = true;
        CHECK(err.n_effective == 4);
    }
    CHECK(threw);

    CHECK_THROWS_AS(conditional_prob_estimate(e, cond, 2, 0.0, 1.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(conditional_prob_estimate(e, cond, 1, 2.0, 1.0, 1),
                    std::invalid_argument);
    std::vector<BinCondition> zero_width{{0, 0.0, 0.0}};
    CHECK_THROWS_AS(conditional_prob_estimate(e, zero_width, 1, 0.0, 1.0, 1),
                    std::invalid_argument);
}

TEST_CASE("ensemble persistence: binary roundtrip, sidecar, corruption") {
    ModelSpec m = decay_model(1.0, 0.5, -1.0, 0.3);
    Grid g{1.0, 8};
    PathEnsemble e = simulate_sve(m, KernelSpec::exponential(2.0, 0.5), g, 5, 42);

    const std::string path = "tmp_test_ensemble.bin";
    save_ensemble(e, path);
    PathEnsemble r = load_ensemble(path);
    CHECK(r.values == e.values);
    CHECK(r.times == e.times);
    CHECK(r.n_paths == e.n_paths);
    CHECK(r.seed == e.seed);
    CHECK(r.scheme_id == e.scheme_id);
    CHECK(r.model_id == e.model_id);
    CHECK(r.kernel_id == e.kernel_id);

    // The text sidecar is advisory: deleting it must not break loading.
    std::remove((path + ".meta").c_str());
    PathEnsemble bare = load_ensemble(path);
    CHECK(bare.values == e.values);
    CHECK(bare.scheme_id.empty());

    // A wrong magic number is a hard error.
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "XXXXgarbage";
    }
    CHECK_THROWS_AS(load_ensemble(path), Error);
    CHECK_THROWS_AS(load_ensemble("no_such_file.bin"), Error);
    std::remove(path.c_str());
}

TEST_CASE("ensemble CSV export shape") {
    ModelSpec m = decay_model(1.0, 0.0, 0.0, 0.0);
    Grid g{1.0, 2};
    PathEnsemble e = simulate_sve(m, KernelSpec::constant(1.0), g, 3, 1);
    const std::string path = "tmp_test_ensemble.csv";
    write_ensemble_csv(e, path);
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header.rfind("path,", 0) == 0);
    CHECK(header.find(",t_") != std::string::npos);
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("kernel-weight scheme tracks the classical scheme as steps refine") {
    ModelSpec m = decay_model(1.0, 1.0, -1.0, 0.4);
    m.lambda = 0.5;
    KernelSpec k = KernelSpec::exponential(2.0, 0.5);
    std::vector<SdeComparisonRow> rows =
        sde_consistency_check(m, k, {100, 200}, 1.0, 300, 7);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n_steps == 100);
    CHECK(rows[1].n_steps == 200);
    CHECK(rows[0].mean_max_deviation > 0.0);
    CHECK(rows[1].mean_max_deviation < rows[0].mean_max_deviation);

    CHECK_THROWS_AS(
        sde_consistency_check(m, KernelSpec::fractional(0.25), {100}, 1.0, 10, 7),
        UnsupportedKindError);
}
