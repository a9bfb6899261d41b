#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sve/clt.hpp"
#include "sve/kernels.hpp"

using namespace sve;

TEST_CASE("rescale spec: exact zoom rate for power kernels") {
    RescaleSpec spec = make_rescale_spec(KernelSpec::fractional(0.25), 16, 0.7);
    CHECK(spec.n == 16);
    CHECK(spec.x0 == 0.7);
    CHECK(spec.lambda_n == doctest::Approx(2.0).epsilon(1e-13));

    CHECK(rescale(spec, 0.7) == 0.0);
    CHECK(rescale(spec, 1.7) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    for (double y : {-0.3, 0.7, 2.9})
        CHECK(rescale_inverse(spec, rescale(spec, y)) ==
              doctest::Approx(y).epsilon(1e-14));

    RescaleSpec flat = make_rescale_spec(KernelSpec::constant(2.0), 1000, 0.0);
    CHECK(flat.lambda_n == doctest::Approx(250.0).epsilon(1e-13));

    CHECK_THROWS_AS(make_rescale_spec(KernelSpec::fractional(0.25), 0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("covariance convergence: frozen log-modulated values") {
    // 50-digit references for s = 1, t = 2 at three zoom levels; the limit
    // uses the pure power kernel with matched roughness.
    std::vector<CovLimitRow> rows =
        covariance_limit_check(KernelSpec::log_modulated(0.3), 1.0, 2.0,
                               {100, 1000, 10000});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].finite_n_value == doctest::Approx(0.42379692278196867).epsilon(1e-8));
    CHECK(rows[1].finite_n_value == doctest::Approx(0.49691363572398863).epsilon(1e-8));
    CHECK(rows[2].finite_n_value == doctest::Approx(0.54048651534071471).epsilon(1e-8));
    for (const auto& r : rows)
        CHECK(r.limit_value == doctest::Approx(0.70040457798603527).epsilon(1e-8));
    // The log correction decays slowly but monotonically.
    CHECK(rows[0].finite_n_value < rows[1].finite_n_value);
    CHECK(rows[1].finite_n_value < rows[2].finite_n_value);
    CHECK(rows[2].finite_n_value < rows[2].limit_value);
}

TEST_CASE("covariance convergence: self-similar kernels sit on their limit") {
    // A pure power kernel is scale-invariant under the zoom, so every n gives
    // the limit exactly (up to quadrature error); the prefactor cancels.
    std::vector<CovLimitRow> rows = covariance_limit_check(
        KernelSpec::fractional(0.25, 2.0), 0.7, 1.3, {1, 7, 64});
    for (const auto& r : rows)
        CHECK(r.finite_n_value == doctest::Approx(r.limit_value).epsilon(1e-9));

    // Diagonal entries too: s = t uses the squared-mass closed form, and the
    // matched-roughness limit kernel normalizes the variance to s^(2H).
    std::vector<CovLimitRow> diag = covariance_limit_check(
        KernelSpec::fractional(0.25, 2.0), 1.0, 1.0, {5});
    CHECK(diag[0].finite_n_value == doctest::Approx(diag[0].limit_value).epsilon(1e-11));
    CHECK(diag[0].limit_value == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("covariance convergence: exponential kernel approaches the flat limit") {
    std::vector<CovLimitRow> rows = covariance_limit_check(
        KernelSpec::exponential(2.0, 0.5), 0.5, 1.0, {10, 100, 1000});
    // Limit kernel is the constant 1, so the limit covariance is s.
    for (const auto& r : rows)
        CHECK(r.limit_value == doctest::Approx(0.5).epsilon(1e-12));
    double e0 = std::abs(rows[0].finite_n_value - rows[0].limit_value);
    double e1 = std::abs(rows[1].finite_n_value - rows[1].limit_value);
    double e2 = std::abs(rows[2].finite_n_value - rows[2].limit_value);
    CHECK(e1 < e0);
    CHECK(e2 < e1);
    CHECK(e2 < 1e-3);

    CHECK_THROWS_AS(
        covariance_limit_check(KernelSpec::exponential(2.0, 0.5), 0.0, 1.0, {10}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        covariance_limit_check(KernelSpec::exponential(2.0, 0.5), 2.0, 1.0, {10}),
        std::invalid_argument);
}

TEST_CASE("empirical rescaled ensemble matches the Gaussian limit") {
    ModelSpec m;
    m.x = 1.0;
    m.sigma0 = 0.5;
    m.diffusion = DiffusionKind::ConstantVol;
    KernelSpec k = KernelSpec::constant(1.0);

    CltReport rep = clt_empirical_check(m, k, {0.5, 1.0}, 100, 4000, 424242);
    CHECK(rep.n == 100);
    CHECK(rep.lambda_n == doctest::Approx(100.0).epsilon(1e-12));
    REQUIRE(rep.times.size() == 2);
    // Two mean entries plus the upper covariance triangle (3 entries).
    REQUIRE(rep.entries.size() == 5);
    int means = 0, covs = 0;
    for (const auto& e : rep.entries) {
        if (e.kind == "mean") {
            ++means;
            CHECK(e.limit == 0.0);
        } else {
            REQUIRE(e.kind == "cov");
            ++covs;
            // sigma(x0)^2 min(t_i, t_j) for the constant kernel.
            CHECK(e.limit ==
                  doctest::Approx(0.25 * std::min(e.t_i, e.t_j)).epsilon(1e-12));
        }
        CHECK(e.se > 0.0);
        CHECK(e.within);
    }
    CHECK(means == 2);
    CHECK(covs == 3);
    CHECK(rep.all_within);

    const std::string path = "tmp_test_clt.csv";
    write_clt_report_csv(rep, path);
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "kind,t_i,t_j,empirical,limit,se,verdict");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("empirical check input validation") {
    ModelSpec m;
    m.x = 1.0;
    m.sigma0 = 0.5;
    KernelSpec k = KernelSpec::constant(1.0);

    // Times off the 500-step grid.
    CHECK_THROWS_AS(clt_empirical_check(m, k, {0.3333, 1.0}, 100, 400, 1),
                    std::invalid_argument);
    // Degenerate diffusion at the anchor.
    ModelSpec silent = m;
    silent.sigma0 = 0.0;
    CHECK_THROWS_AS(clt_empirical_check(silent, k, {1.0}, 100, 400, 1),
                    std::invalid_argument);
    // Nonzero decay rate is outside the zoom's scope.
    ModelSpec decaying = m;
    decaying.lambda = 0.5;
    CHECK_THROWS_AS(clt_empirical_check(decaying, k, {1.0}, 100, 400, 1),
                    std::invalid_argument);
    // Too few paths for batched standard errors.
    CHECK_THROWS_AS(clt_empirical_check(m, k, {1.0}, 100, 20, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(clt_empirical_check(m, k, {}, 100, 400, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(clt_empirical_check(m, k, {-1.0, 1.0}, 100, 400, 1),
                    std::invalid_argument);
}
