#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sve/errors.hpp"
#include "sve/kernels.hpp"
#include "sve/quadrature.hpp"
#include "sve/volterra.hpp"

using namespace sve;

TEST_CASE("grid validation and node placement") {
    Grid g{2.0, 8};
    CHECK(g.h() == doctest::Approx(0.25).epsilon(1e-16));
    CHECK(g.node(3) == doctest::Approx(0.75).epsilon(1e-16));
    CHECK_THROWS_AS((Grid{0.0, 8}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((Grid{-1.0, 8}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((Grid{1.0, 0}).validate(), std::invalid_argument);
}

TEST_CASE("panel moments: exponential closed forms vs hand formulas and quadrature") {
    const double c = 2.0, r = 0.7;
    KernelSpec k = KernelSpec::exponential(c, r);
    Grid g{1.0, 8};
    const double h = g.h();
    KernelMoments m = kernel_lag_moments(k, g);
    REQUIRE(m.M0.size() == 9);

    for (int d : {1, 5}) {
        const double a = (d - 1) * h;
        const double m0 = (c / r) * (std::exp(-r * a) - std::exp(-r * d * h));
        const double inner =
            h * (1.0 - std::exp(-r * h)) / r -
            (1.0 - std::exp(-r * h) * (1.0 + r * h)) / (r * r);
        const double m1 = c * std::exp(-r * a) / h * inner;
        CHECK(m.M0[d] == doctest::Approx(m0).epsilon(1e-13));
        CHECK(m.M1[d] == doctest::Approx(m1).epsilon(1e-13));
    }

    // Independent route: adaptive quadrature of the weighted panel integrals.
    const int d = 5;
    auto f0 = [&](double v) { return kernel_eval(k, v); };
    auto f1 = [&](double v) { return kernel_eval(k, v) * (d * h - v) / h; };
    CHECK(m.M0[d] ==
          doctest::Approx(integrate_adaptive(f0, (d - 1) * h, d * h).value)
              .epsilon(1e-11));
    CHECK(m.M1[d] ==
          doctest::Approx(integrate_adaptive(f1, (d - 1) * h, d * h).value)
              .epsilon(1e-11));
}

TEST_CASE("panel moments: singular fractional first panel in closed form") {
    const double H = 0.25, scale = 1.3;
    KernelSpec k = KernelSpec::fractional(H, scale);
    Grid g{0.8, 8};
    const double h = g.h();
    KernelMoments m = kernel_lag_moments(k, g);
    const double alpha = H + 0.5;
    CHECK(m.M0[1] ==
          doctest::Approx(scale * std::pow(h, alpha) / alpha).epsilon(1e-13));
    CHECK(m.M1[1] ==
          doctest::Approx(scale * std::pow(h, alpha) / (alpha * (alpha + 1.0)))
              .epsilon(1e-13));

    // Away from the singularity the quadrature route must agree.
    const int d = 4;
    auto f1 = [&](double v) { return kernel_eval(k, v) * (d * h - v) / h; };
    CHECK(m.M1[d] ==
          doctest::Approx(integrate_adaptive(f1, (d - 1) * h, d * h).value)
              .epsilon(1e-11));
}

TEST_CASE("panel moments: log-modulated panels match direct quadrature") {
    KernelSpec k = KernelSpec::log_modulated(0.3);
    Grid g{1.0, 8};
    const double h = g.h();
    KernelMoments m = kernel_lag_moments(k, g);
    const int d = 3;
    auto f0 = [&](double v) { return kernel_eval(k, v); };
    auto f1 = [&](double v) { return kernel_eval(k, v) * (d * h - v) / h; };
    CHECK(m.M0[d] ==
          doctest::Approx(integrate_adaptive(f0, (d - 1) * h, d * h).value)
              .epsilon(1e-9));
    CHECK(m.M1[d] ==
          doctest::Approx(integrate_adaptive(f1, (d - 1) * h, d * h).value)
              .epsilon(1e-9));
    // First panel: singular integrand, compare against the squared-power route.
    auto s0 = [&](double v) { return kernel_eval(k, v); };
    CHECK(m.M0[1] ==
          doctest::Approx(integrate_power_singular(s0, -0.2, h).value).epsilon(1e-9));
}

TEST_CASE("linear Volterra solve: constant kernel gives the exponential ODE solution") {
    Grid g{1.0, 512};
    ValueTable u = solve_linear_volterra(KernelSpec::constant(1.0), -1.0,
                                         [](double) { return 1.0; }, g);
    REQUIRE(static_cast<int>(u.values.size()) == g.N + 1);
    CHECK(std::isnan(u.values[0]));
    CHECK(u.residual <= kSolverDeclaredTolerance);
    for (int k : {128, 256, 512})
        CHECK(u.values[k] == doctest::Approx(std::exp(-g.node(k))).epsilon(1e-5));
}

TEST_CASE("linear Volterra solve: beta = 0 returns the forcing at the nodes") {
    Grid g{1.0, 16};
    ValueTable u = solve_linear_volterra(KernelSpec::fractional(0.25), 0.0,
                                         [](double t) { return std::sin(t); }, g);
    for (int k = 1; k <= g.N; ++k)
        CHECK(u.values[k] == doctest::Approx(std::sin(g.node(k))).epsilon(1e-14));
    CHECK(u.residual <= 1e-14);
}

TEST_CASE("diagonal blow-up raises a step-size error") {
    Grid g{1.0, 10};
    CHECK_THROWS_AS(resolvent_table(KernelSpec::constant(1.0), 20.0, 0.0, g),
                    StepSizeError);
}

TEST_CASE("resolvent table: exponential kernel closed forms") {
    const double c = 2.0, rate = 0.5, beta = -0.4;
    KernelSpec k = KernelSpec::exponential(c, rate);
    Grid g{1.0, 2048};

    ResolventTable tab = resolvent_table(k, beta, rate, g);
    CHECK(std::isnan(tab.EK[0]));
    CHECK(tab.E1[0] == 1.0);
    CHECK(tab.w[0] == 0.0);
    CHECK(tab.residual <= kSolverDeclaredTolerance);

    // EK(t) = c e^((beta c - rate) t), independent of lambda.
    const double growth = beta * c - rate;
    for (int node : {1, 512, 1024, 2048}) {
        const double t = g.node(node);
        CHECK(tab.EK[node] == doctest::Approx(c * std::exp(growth * t)).epsilon(5e-6));
        CHECK(tab.RK[node] == -beta * tab.EK[node]);
    }
    ResolventTable tab0 = resolvent_table(k, beta, 0.0, g);
    for (int node : {64, 2048}) CHECK(tab.EK[node] == tab0.EK[node]);

    // With lambda = rate the drift multiplier collapses to e^(beta c T).
    CHECK(tab.E1[2048] == doctest::Approx(std::exp(beta * c)).epsilon(5e-6));

    // E1bar is the e^(-lambda t)-weighted version of E1.
    for (int node : {1, 777, 2048}) {
        const double t = g.node(node);
        CHECK(tab.E1bar[node] ==
              doctest::Approx(std::exp(-rate * t) * tab.E1[node]).epsilon(1e-14));
    }

    // lambda = 0: the drift multiplier is 1 + beta * cumulative EK.
    for (int node : {1, 777, 2048})
        CHECK(tab0.E1[node] ==
              doctest::Approx(1.0 + beta * tab0.cumEK[node]).epsilon(1e-12));

    // Interpolants hit the nodes and refuse t = 0 where EK may be singular.
    CHECK(tab.EK_at(g.node(512)) == doctest::Approx(tab.EK[512]).epsilon(1e-13));
    CHECK(tab.E1_at(0.0) == 1.0);
    CHECK(tab.cumEK_at(0.0) == 0.0);
    CHECK_THROWS_AS(tab.EK_at(0.0), std::domain_error);
}

TEST_CASE("resolvent table: singular kernel reproduces the special-function series") {
    // Fractional H = 1/4, unit scale, beta = -1: EK is a known transcendental
    // series; reference values were computed with 50-digit arithmetic.
    KernelSpec k = KernelSpec::fractional(0.25, 1.0);
    Grid g{1.0, 4096};
    ResolventTable tab = resolvent_table(k, -1.0, 0.0, g);
    CHECK(tab.residual <= kSolverDeclaredTolerance);

    CHECK(tab.EK[64] == doctest::Approx(2.6253273217163498).epsilon(1e-5));
    CHECK(tab.EK[1024] == doctest::Approx(0.79546073987668499).epsilon(1e-5));
    CHECK(tab.EK[2048] == doctest::Approx(0.46428520782655599).epsilon(1e-5));
    CHECK(tab.EK[4096] == doctest::Approx(0.22189724017759359).epsilon(1e-5));
    CHECK(tab.E1[4096] == doctest::Approx(0.33137823700973265).epsilon(1e-5));

    // Subtracted unknown: w = EK - K with w(0) = 0 and w continuous.
    for (int node : {1, 64, 4096}) {
        const double t = g.node(node);
        CHECK(tab.w[node] ==
              doctest::Approx(tab.EK[node] - kernel_eval(k, t)).epsilon(1e-12));
    }
}

TEST_CASE("squared-kernel resolvent: sign, residual, frozen cumulative values") {
    KernelSpec k = KernelSpec::fractional(0.3, 1.0);
    Grid g{1.0, 4096};
    SquaredResolventTable tab = resolvent_squared_kernel(k, 1.0, g);
    CHECK(tab.residual <= kSolverDeclaredTolerance);
    CHECK(tab.sign_ok);
    CHECK(tab.max_sign_violation == 0.0);
    CHECK(std::isnan(tab.R[0]));
    CHECK(tab.wbar[0] == 0.0);

    std::vector<double> cum = tab.cum_exp_weighted(0.0);
    REQUIRE(static_cast<int>(cum.size()) == g.N + 1);
    CHECK(cum[0] == 0.0);
    CHECK(cum[2048] == doctest::Approx(-3.1162744244510927).epsilon(5e-4));
    CHECK(cum[4096] == doctest::Approx(-10.402076001563840).epsilon(5e-4));
    // R <= 0 makes the cumulative run non-increasing.
    for (int node = 1; node <= g.N; ++node) CHECK(cum[node] <= cum[node - 1] + 1e-15);
}

TEST_CASE("squared-kernel resolvent: sigma0 = 0 short-circuits to zero") {
    Grid g{1.0, 64};
    SquaredResolventTable tab =
        resolvent_squared_kernel(KernelSpec::fractional(0.3), 0.0, g);
    CHECK(tab.sign_ok);
    CHECK(tab.residual == 0.0);
    for (int node = 1; node <= g.N; ++node) CHECK(tab.R[node] == 0.0);
}

TEST_CASE("resolvent CSV export") {
    Grid g{1.0, 4};
    ResolventTable tab = resolvent_table(KernelSpec::exponential(1.0, 1.0), -0.5, 0.0, g);
    const std::string path = "tmp_test_resolvent.csv";
    write_resolvent_csv(tab, path);
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,EK,RK,E1,E1bar");
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
        CHECK(line.find(',') != std::string::npos);
        CHECK(line.find('\r') == std::string::npos);  // LF endings only
    }
    CHECK(rows == g.N);
    in.close();
    std::remove(path.c_str());
}
