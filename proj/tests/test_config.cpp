#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sve/config.hpp"
#include "sve/errors.hpp"

using namespace sve;

namespace {

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("parsing: comments, whitespace, inline trimming") {
    Config cfg = Config::parse_text(
        "# full-line comment\n"
        "\n"
        "  kernel.kind = exponential   # trailing comment\n"
        "\tgrid.N\t=\t64\n"
        "name = spaced value here\n",
        "inline");
    CHECK(cfg.get_string("kernel.kind") == "exponential");
    CHECK(cfg.get_long("grid.N") == 64);
    CHECK(cfg.get_string("name") == "spaced value here");
    CHECK_NOTHROW(cfg.require_all_consumed());
}

TEST_CASE("parsing: malformed lines carry the origin and line number") {
    std::string msg = message_of(
        [] { Config::parse_text("a=1\njust words\n", "f.cfg"); });
    CHECK(msg.find("f.cfg:2") != std::string::npos);
    CHECK(msg.find("key=value") != std::string::npos);

    msg = message_of([] { Config::parse_text("=3\n", "f.cfg"); });
    CHECK(msg.find("f.cfg:1") != std::string::npos);
    CHECK(msg.find("empty key") != std::string::npos);

    msg = message_of([] { Config::parse_text("k.x=\n", "f.cfg"); });
    CHECK(msg.find("empty value") != std::string::npos);
    CHECK(msg.find("k.x") != std::string::npos);
}

TEST_CASE("parsing: duplicate keys report both definitions") {
    std::string msg = message_of(
        [] { Config::parse_text("x = 1\n# gap\nx = 2\n", "dup.cfg"); });
    CHECK(msg.find("dup.cfg:3") != std::string::npos);
    CHECK(msg.find("duplicate key \"x\"") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
}

TEST_CASE("typed getters and their failure modes") {
    Config cfg = Config::parse_text(
        "d = 2.5e-3\nl = -42\nb1 = yes\nb2 = 0\nbad = 12abc\n", "t.cfg");
    CHECK(cfg.get_double("d") == doctest::Approx(2.5e-3).epsilon(1e-15));
    CHECK(cfg.get_long("l") == -42);
    CHECK(cfg.get_bool("b1") == true);
    CHECK(cfg.get_bool("b2") == false);
    CHECK_THROWS_AS(cfg.get_double("bad"), ConfigError);
    CHECK_THROWS_AS(cfg.get_long("d"), ConfigError);   // 2.5e-3 is not an integer
    CHECK_THROWS_AS(cfg.get_bool("l"), ConfigError);   // -42 is not a boolean
    CHECK_THROWS_AS(cfg.get_double("absent"), ConfigError);

    std::string msg =
        message_of([&] { (void)cfg.get_double("missing.key"); });
    CHECK(msg.find("t.cfg") != std::string::npos);
    CHECK(msg.find("missing.key") != std::string::npos);
}

TEST_CASE("fallback getters only fall back on absence") {
    Config cfg = Config::parse_text("present = 3\n", "t.cfg");
    CHECK(cfg.get_double_or("present", 7.0) == 3.0);
    CHECK(cfg.get_double_or("absent", 7.0) == 7.0);
    CHECK(cfg.get_long_or("absent", 9) == 9);
    CHECK(cfg.get_string_or("absent", "dflt") == "dflt");
    CHECK(cfg.get_bool_or("absent", true) == true);
    // A present but unparseable value still fails.
    Config bad = Config::parse_text("present = x\n", "t.cfg");
    CHECK_THROWS_AS(bad.get_double_or("present", 7.0), ConfigError);
}

TEST_CASE("consumption tracking flags typo keys") {
    Config cfg = Config::parse_text("a = 1\nmispeled = 2\n", "c.cfg");
    CHECK(cfg.has("mispeled"));  // has() must not consume
    (void)cfg.get_long("a");
    std::vector<std::string> stray = cfg.unconsumed_keys();
    REQUIRE(stray.size() == 1);
    CHECK(stray[0] == "mispeled");
    std::string msg = message_of([&] { cfg.require_all_consumed(); });
    CHECK(msg.find("unknown key(s)") != std::string::npos);
    CHECK(msg.find("\"mispeled\"") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
    (void)cfg.get_long("mispeled");
    CHECK_NOTHROW(cfg.require_all_consumed());
}

TEST_CASE("overrides replace or add values and show in the resolved dump") {
    Config cfg = Config::parse_text("b = 2\na = 1\n", "o.cfg");
    cfg.override_value("b", "20");
    cfg.override_value("c", "30");
    CHECK(cfg.get_long("b") == 20);
    CHECK(cfg.get_long("c") == 30);
    CHECK(cfg.resolved_dump() == "a=1\nb=20\nc=30\n");  // sorted by key
}

TEST_CASE("kernel builder covers every kind and rejects unknown ones") {
    auto build = [](const std::string& text) {
        Config cfg = Config::parse_text(text, "k.cfg");
        KernelSpec k = kernel_from_config(cfg);
        cfg.require_all_consumed();
        return k;
    };

    KernelSpec e = build("kernel.kind=exponential\nkernel.c=2\nkernel.rate=0.5\n");
    CHECK(e.kind == KernelKind::Exponential);
    CHECK(e.c == 2.0);
    CHECK(e.rate == 0.5);

    KernelSpec f = build("kernel.kind=fractional\nkernel.H=0.25\n");
    CHECK(f.kind == KernelKind::Fractional);
    CHECK(f.scale == 1.0);  // declared default, not any normalization

    KernelSpec f2 = build("kernel.kind=fractional\nkernel.H=0.25\nkernel.scale=3\n");
    CHECK(f2.scale == 3.0);

    KernelSpec g = build(
        "kernel.kind=gamma_fractional\nkernel.H=0.35\nkernel.damping=1.2\n"
        "kernel.scale=0.8\n");
    CHECK(g.kind == KernelKind::GammaFractional);
    CHECK(g.damping == 1.2);

    KernelSpec lm = build("kernel.kind=log_modulated\nkernel.H=0.3\n");
    CHECK(lm.kind == KernelKind::LogModulated);

    KernelSpec c = build("kernel.kind=constant\nkernel.c=1.5\n");
    CHECK(c.kind == KernelKind::Constant);

    KernelSpec x = build("kernel.kind=exotic\n");
    CHECK(x.kind == KernelKind::Tabulated);
    CHECK(x.table_t.size() == 3001);

    Config bad = Config::parse_text("kernel.kind=mystery\n", "k.cfg");
    CHECK_THROWS_AS(kernel_from_config(bad), ConfigError);

    // Missing a required kind-specific key is an error, not a silent default.
    Config missing = Config::parse_text("kernel.kind=exponential\nkernel.c=2\n", "k.cfg");
    CHECK_THROWS_AS(kernel_from_config(missing), ConfigError);
}

TEST_CASE("model builder: diffusion kinds and state-space defaults") {
    auto build = [](const std::string& text) {
        Config cfg = Config::parse_text(text, "m.cfg");
        ModelSpec m = model_from_config(cfg);
        cfg.require_all_consumed();
        return m;
    };

    ModelSpec plain = build("model.x=0.7\n");
    CHECK(plain.diffusion == DiffusionKind::ConstantVol);
    CHECK(plain.state_space == StateSpace::AllReals);
    CHECK(plain.sigma0 == 1.0);
    CHECK(plain.chi_b == 1.0);
    CHECK(plain.chi_sigma == 0.5);

    ModelSpec cir = build(
        "model.x=1\nmodel.b0=1\nmodel.beta=-1\nmodel.diffusion=sqrt\n"
        "model.sigma0=0.3\n");
    CHECK(cir.diffusion == DiffusionKind::SqrtVol);
    CHECK(cir.state_space == StateSpace::NonnegativeReals);  // defaulted

    ModelSpec jac = build(
        "model.x=0.5\nmodel.diffusion=jacobi\nmodel.alpha1=0\nmodel.alpha2=1\n");
    CHECK(jac.state_space == StateSpace::Interval);

    // Jacobi requires explicit interval endpoints.
    Config no_alpha =
        Config::parse_text("model.x=0.5\nmodel.diffusion=jacobi\n", "m.cfg");
    CHECK_THROWS_AS(model_from_config(no_alpha), ConfigError);

    Config bad_kind =
        Config::parse_text("model.x=0\nmodel.diffusion=cubic\n", "m.cfg");
    CHECK_THROWS_AS(model_from_config(bad_kind), ConfigError);

    Config bad_space = Config::parse_text(
        "model.x=0\nmodel.state_space=everywhere\n", "m.cfg");
    CHECK_THROWS_AS(model_from_config(bad_space), ConfigError);

    // The built model is validated: sqrt diffusion from a negative start.
    Config invalid = Config::parse_text(
        "model.x=-1\nmodel.diffusion=sqrt\n", "m.cfg");
    CHECK_THROWS_AS(model_from_config(invalid), std::invalid_argument);
}

TEST_CASE("grid builder") {
    Config cfg = Config::parse_text("grid.T=2.5\ngrid.N=512\n", "g.cfg");
    Grid g = grid_from_config(cfg);
    CHECK(g.T == 2.5);
    CHECK(g.N == 512);
    cfg.require_all_consumed();

    Config missing = Config::parse_text("grid.T=2.5\n", "g.cfg");
    CHECK_THROWS_AS(grid_from_config(missing), ConfigError);
    Config invalid = Config::parse_text("grid.T=2.5\ngrid.N=0\n", "g.cfg");
    CHECK_THROWS_AS(grid_from_config(invalid), std::invalid_argument);
}
