// svelab: command-line front end over the SVE verification library.
//
// Subcommands: kernel-info, resolvent, moment-check, defect-sweep, doob,
// lemma31, clt-check, simulate, cond-prob. Every run takes a strict
// key=value config file, applies flag overrides, echoes the fully resolved
// config into the output directory, and writes CSV artifacts (comma
// separator, '.' decimal, header row, LF endings, 17 significant digits).
//
// Exit codes: 0 success, 1 error, 2 a verdict came back "violated" while
// --expect-consistent was set.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sve/affine_moments.hpp"
#include "sve/clt.hpp"
#include "sve/config.hpp"
#include "sve/ensemble.hpp"
#include "sve/errors.hpp"
#include "sve/gaussian_rl.hpp"
#include "sve/io.hpp"
#include "sve/kernels.hpp"
#include "sve/mc_sim.hpp"
#include "sve/volterra.hpp"

namespace fs = std::filesystem;
using namespace sve;

namespace {

struct RunEnv {
    fs::path out;
    std::uint64_t seed = 1;
    int threads = 1;
    bool expect_consistent = false;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what + ": not a number: \"" + item + "\"");
        }
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

std::vector<long> parse_long_list(const std::string& text, const std::string& what) {
    std::vector<long> out;
    for (double v : parse_double_list(text, what)) {
        long n = static_cast<long>(v);
        if (static_cast<double>(n) != v)
            throw ConfigError(what + ": not an integer: " + fmt_g17(v));
        out.push_back(n);
    }
    return out;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void write_resolved_config(const Config& cfg, const fs::path& out) {
    std::ofstream f(out / "resolved.cfg", std::ios::binary);
    if (!f) throw Error("cannot write " + (out / "resolved.cfg").string());
    f << cfg.resolved_dump();
}

// ---------------------------------------------------------------- kernel-info

int cmd_kernel_info(const Config& cfg, const RunEnv& env) {
    KernelSpec kernel = kernel_from_config(cfg);
    double t_max = cfg.get_double_or("info.t_max", 1.0);
    long points = cfg.get_long_or("info.points", 200);
    if (t_max <= 0 || points < 1) throw ConfigError("info.t_max and info.points must be positive");
    cfg.require_all_consumed();

    CsvWriter csv((env.out / "kernel_info.csv").string());
    csv.row({"t", "K", "int_K_0_t", "int_Ksq_0_t"});
    for (long i = 1; i <= points; ++i) {
        double t = t_max * static_cast<double>(i) / static_cast<double>(points);
        csv.row({fmt_g17(t), fmt_g17(kernel_eval(kernel, t)),
                 fmt_g17(kernel_integrate(kernel, 0.0, t)),
                 fmt_g17(kernel_integrate_sq(kernel, t))});
    }

    CsvWriter scaling((env.out / "kernel_scaling.csv").string());
    scaling.row({"n", "lambda_n"});
    for (long n : {1L, 4L, 16L, 64L, 256L, 1024L, 4096L}) {
        try {
            scaling.row({std::to_string(n), fmt_g17(lambda_n(kernel, n))});
        } catch (const std::exception&) {
            // Kernels decaying faster than any power overflow lambda_n;
            // record the breakdown point instead of failing the tabulation.
            std::cout << "lambda_n: not representable from n=" << n << "\n";
            break;
        }
    }

    std::cout << "kernel: " << kernel.id() << "\n";
    std::cout << "singular_at_zero: " << yes_no(kernel.singular_at_zero()) << "\n";
    std::string limit_id;
    try {
        limit_id = limit_kernel(kernel).id();
    } catch (const UnsupportedKindError&) {
        limit_id = "(not defined for tabulated kernels)";
    }
    std::cout << "limit_kernel: " << limit_id << "\n";
    std::cout << "rows: " << points << "\n";
    return 0;
}

// ------------------------------------------------------------------ resolvent

int cmd_resolvent(const Config& cfg, const RunEnv& env) {
    KernelSpec kernel = kernel_from_config(cfg);
    Grid grid = grid_from_config(cfg);
    double beta = cfg.get_double("resolvent.beta");
    double lambda = cfg.get_double_or("resolvent.lambda", 0.0);
    cfg.require_all_consumed();

    ResolventTable table = resolvent_table(kernel, beta, lambda, grid);
    write_resolvent_csv(table, (env.out / "resolvent.csv").string());
    std::cout << "kernel: " << kernel.id() << "\n";
    std::cout << "residual: " << fmt_g17(table.residual) << "\n";
    std::cout << "E1(T): " << fmt_g17(table.E1.back()) << "\n";
    std::cout << "cumEK(T): " << fmt_g17(table.cumEK.back()) << "\n";
    return 0;
}

// --------------------------------------------------------------- moment-check

int cmd_moment_check(const Config& cfg, const RunEnv& env) {
    KernelSpec kernel = kernel_from_config(cfg);
    ModelSpec model = model_from_config(cfg);
    Grid grid = grid_from_config(cfg);
    double T = cfg.get_double_or("moment.T", grid.T);
    long mc_paths = cfg.get_long_or("moment.mc_paths", 0);
    double bias_allowance = cfg.get_double_or("moment.bias_allowance", 0.0);
    cfg.require_all_consumed();
    if (T <= 0 || T > grid.T) throw ConfigError("moment.T must lie in (0, grid.T]");

    bool zero_drift = model.b0 == 0.0 && model.beta == 0.0;
    bool need_table = model.beta != 0.0;

    struct Row {
        std::string quantity;
        double formula;
        bool has_mc = false;
        double mc = 0.0, se = 0.0, allowance = 0.0;
    };
    std::vector<Row> rows;

    ResolventTable table;
    if (need_table) table = resolvent_table(kernel, model.beta, model.lambda, grid);

    Row m1{"first_moment",
           need_table ? first_moment(model, table, T) : first_moment(model, kernel, T, grid),
           false, 0.0, 0.0, 0.0};
    rows.push_back(m1);

    if (model.diffusion == DiffusionKind::SqrtVol) {
        if (zero_drift)
            rows.push_back({"second_moment", second_moment_sqrt(model, kernel, T),
                            false, 0.0, 0.0, 0.0});
        else
            rows.push_back({"second_moment",
                            second_moment_sqrt_drifted(model, need_table ? table
                                : resolvent_table(kernel, 0.0, model.lambda, grid), T),
                            false, 0.0, 0.0, 0.0});
    } else if (model.diffusion == DiffusionKind::LinearVol && zero_drift) {
        rows.push_back({"second_moment", second_moment_linear(model, kernel, T, grid),
                        false, 0.0, 0.0, 0.0});
    }

    bool any_violated = false;
    if (mc_paths > 0) {
        Grid sim_grid{T, grid.N};
        SimOptions opt;
        opt.threads = env.threads;
        opt.store_nodes = {grid.N};
        PathEnsemble ens = simulate_sve(model, kernel, sim_grid, mc_paths, env.seed, opt);
        for (auto& row : rows) {
            int order = row.quantity == "first_moment" ? 1 : 2;
            MomentEstimate est = empirical_moment(ens, 0, order);
            row.has_mc = true;
            row.mc = est.estimate;
            row.se = est.standard_error;
            row.allowance = order == 2 ? bias_allowance * std::abs(row.formula) : 0.0;
            if (std::abs(est.estimate - row.formula) > 3.0 * est.standard_error + row.allowance)
                any_violated = true;
        }
    }

    CsvWriter csv((env.out / "moments.csv").string());
    csv.row({"quantity", "formula", "mc_estimate", "mc_se", "verdict"});
    for (const auto& row : rows) {
        std::string verdict = "n/a";
        if (row.has_mc)
            verdict = std::abs(row.mc - row.formula) <= 3.0 * row.se + row.allowance
                          ? "consistent" : "violated";
        csv.row({row.quantity, fmt_g17(row.formula),
                 row.has_mc ? fmt_g17(row.mc) : std::string(),
                 row.has_mc ? fmt_g17(row.se) : std::string(), verdict});
        std::cout << row.quantity << ": " << fmt_g17(row.formula);
        if (row.has_mc)
            std::cout << " mc: " << fmt_g17(row.mc) << " se: " << fmt_g17(row.se)
                      << " verdict: " << verdict;
        std::cout << "\n";
    }
    return (any_violated && env.expect_consistent) ? 2 : 0;
}

// --------------------------------------------------------------- defect-sweep

int cmd_defect_sweep(const Config& cfg, const RunEnv& env) {
    KernelSpec kernel = kernel_from_config(cfg);
    double lambda = cfg.get_double_or("sweep.lambda", 0.0);
    std::string functional = cfg.get_string_or("sweep.functional", "all");
    double sigma0 = cfg.get_double_or("sweep.sigma0", 0.4);
    long n_first = cfg.get_long_or("sweep.N_first", 8192);
    long n_linear = cfg.get_long_or("sweep.N_linear", 2048);
    double fit_tol = cfg.get_double_or("sweep.fit_tol", 1e-6);
    cfg.require_all_consumed();
    if (functional != "all" && functional != "first" && functional != "sqrt" &&
        functional != "linear")
        throw ConfigError("sweep.functional must be first|sqrt|linear|all");

    const std::vector<double> horizons = {0.5, 1.0, 2.0};
    const double t_max_all = 2.0;
    auto lattice_ts = [](double T) {
        std::vector<double> ts;
        for (int i = 1; i <= 9; ++i) ts.push_back(0.1 * i * T);
        return ts;
    };

    ExpFitReport fit = exponential_fit_test(kernel, lambda, Grid{t_max_all, 256}, fit_tol);
    bool any_violated = false;

    auto summarize = [&](const char* name, const std::vector<DefectRow>& rows) {
        bool all_ok = true;
        double max_abs = 0.0;
        for (const auto& r : rows) {
            all_ok = all_ok && r.report.consistent();
            max_abs = std::max(max_abs, std::abs(r.report.defect));
        }
        if (!all_ok) any_violated = true;
        bool dichotomy_ok = (all_ok == fit.ok);
        std::cout << name << ": rows=" << rows.size() << " max_abs_defect="
                  << fmt_g17(max_abs) << " all_consistent=" << yes_no(all_ok)
                  << " dichotomy=" << (dichotomy_ok ? "ok" : "VIOLATED") << "\n";
    };

    if (functional == "all" || functional == "first") {
        Grid grid{t_max_all, static_cast<int>(n_first)};
        const std::vector<std::pair<double, double>> drifts = {{1, 0}, {0, -1}, {1, -1}};
        ResolventTable table;  // shared by the beta = -1 drifts
        bool have_table = false;
        std::vector<DefectRow> rows;
        for (auto [b0, beta] : drifts) {
            ModelSpec model;
            model.x = 0.7;
            model.lambda = lambda;
            model.b0 = b0;
            model.beta = beta;
            model.sigma0 = 1.0;
            model.validate();
            for (double T : horizons)
                for (double t : lattice_ts(T)) {
                    DefectReport rep;
                    if (beta == 0.0) {
                        rep = first_moment_flow_defect(model, kernel, t, T, grid);
                    } else {
                        if (!have_table) {
                            table = resolvent_table(kernel, beta, lambda, grid);
                            have_table = true;
                        }
                        rep = first_moment_flow_defect(model, table, t, T);
                    }
                    rows.push_back({kernel.id(), lambda, b0, beta, rep});
                }
        }
        write_defect_rows_csv(rows, (env.out / "defects_first.csv").string());
        summarize("first-moment", rows);
    }

    if (functional == "all" || functional == "sqrt") {
        std::vector<DefectRow> rows;
        for (double T : horizons)
            for (double t : lattice_ts(T))
                rows.push_back({kernel.id(), lambda, 0.0, 0.0,
                                second_moment_sqrt_defect(kernel, lambda, t, T)});
        write_defect_rows_csv(rows, (env.out / "defects_sqrt.csv").string());
        summarize("sqrt-second-moment", rows);
    }

    if (functional == "all" || functional == "linear") {
        Grid grid{t_max_all, static_cast<int>(n_linear)};
        SquaredResolventTable table = resolvent_squared_kernel(kernel, sigma0, grid);
        std::vector<double> cum = table.cum_exp_weighted(lambda);
        std::vector<DefectRow> rows;
        for (double T : horizons)
            for (double t : lattice_ts(T))
                rows.push_back({kernel.id(), lambda, 0.0, 0.0,
                                second_moment_linear_defect(cum, grid, t, T)});
        write_defect_rows_csv(rows, (env.out / "defects_linear.csv").string());
        summarize("linear-second-moment", rows);
    }

    std::cout << "exponential_fit: " << (fit.ok ? "pass" : "fail")
              << " sup_deviation=" << fmt_g17(fit.sup_deviation) << "\n";
    return (any_violated && env.expect_consistent) ? 2 : 0;
}

// ----------------------------------------------------------------------- doob

int cmd_doob(const Config& cfg, const RunEnv& env) {
    double H = cfg.get_double("doob.H");
    double tol = cfg.get_double_or("doob.tol", 1e-10);
    std::string triple = cfg.get_string_or("doob.triple", "");
    cfg.require_all_consumed();

    std::vector<std::array<double, 3>> triples;
    if (!triple.empty()) {
        auto v = parse_double_list(triple, "doob.triple");
        if (v.size() != 3) throw ConfigError("doob.triple needs exactly three times s,t,u");
        triples.push_back({v[0], v[1], v[2]});
    } else {
        for (double s : {0.5, 1.0, 1.5})
            for (double g1 : {0.25, 0.5, 1.0})
                for (double g2 : {0.25, 0.5, 1.0})
                    triples.push_back({s, s + g1, s + g1 + g2});
    }

    CsvWriter csv((env.out / "doob.csv").string());
    csv.row({"H", "s", "t", "u", "defect", "verdict"});
    double max_abs = 0.0;
    bool all_ok = true;
    for (const auto& tr : triples) {
        double d = doob_defect(H, tr[0], tr[1], tr[2]);
        bool ok = std::abs(d) <= tol;
        all_ok = all_ok && ok;
        max_abs = std::max(max_abs, std::abs(d));
        csv.row({fmt_g17(H), fmt_g17(tr[0]), fmt_g17(tr[1]), fmt_g17(tr[2]), fmt_g17(d),
                 ok ? "consistent" : "violated"});
    }
    std::cout << "triples: " << triples.size() << "\n";
    std::cout << "max_abs_defect: " << fmt_g17(max_abs) << "\n";
    std::cout << "verdict: " << (all_ok ? "consistent" : "violated") << "\n";
    return (!all_ok && env.expect_consistent) ? 2 : 0;
}

// -------------------------------------------------------------------- lemma31

int cmd_lemma31(const Config& cfg, const RunEnv& env) {
    double H = cfg.get_double("lemma.H");
    CertificateSearchConfig search;
    search.margin_min = cfg.get_double_or("lemma.margin_min", search.margin_min);
    search.k_min = static_cast<int>(cfg.get_long_or("lemma.k_min", search.k_min));
    search.k_max = static_cast<int>(cfg.get_long_or("lemma.k_max", search.k_max));
    search.delta = cfg.get_double_or("lemma.delta", search.delta);
    cfg.require_all_consumed();

    fs::path report_path = env.out / "lemma31_certificate.txt";
    try {
        NonMarkovCertificate cert = lemma31_certificate(H, search);
        std::ofstream f(report_path, std::ios::binary);
        f << cert.report();
        std::cout << cert.report();
        std::cout << "certificate: " << report_path.string() << "\n";
        return 0;
    } catch (const SearchExhaustedError& e) {
        std::ofstream f(report_path, std::ios::binary);
        f << "no certificate found\n"
          << "H=" << fmt_g17(H) << "\n"
          << "best_margin=" << fmt_g17(e.best_margin) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        std::cout << "best_margin: " << fmt_g17(e.best_margin) << "\n";
        return 1;
    }
}

// ------------------------------------------------------------------ clt-check

int cmd_clt_check(const Config& cfg, const RunEnv& env) {
    KernelSpec kernel = kernel_from_config(cfg);
    std::string mode = cfg.get_string_or("clt.mode", "empirical");
    if (mode == "limit") {
        double s = cfg.get_double_or("clt.s", 1.0);
        double t = cfg.get_double_or("clt.t", 2.0);
        std::vector<long> n_list =
            parse_long_list(cfg.get_string_or("clt.n_list", "10,100,1000,10000"), "clt.n_list");
        cfg.require_all_consumed();
        auto rows = covariance_limit_check(kernel, s, t, n_list);
        CsvWriter csv((env.out / "clt_limit.csv").string());
        csv.row({"n", "finite_n", "limit", "abs_error"});
        for (const auto& r : rows)
            csv.row({std::to_string(r.n), fmt_g17(r.finite_n_value), fmt_g17(r.limit_value),
                     fmt_g17(std::abs(r.finite_n_value - r.limit_value))});
        std::cout << "rows: " << rows.size() << "\n";
        std::cout << "limit: " << fmt_g17(rows.empty() ? 0.0 : rows.front().limit_value) << "\n";
        return 0;
    }
    if (mode != "empirical") throw ConfigError("clt.mode must be empirical|limit");

    ModelSpec model = model_from_config(cfg);
    std::vector<double> times =
        parse_double_list(cfg.get_string_or("clt.times", "1,2"), "clt.times");
    long n = cfg.get_long_or("clt.n", 10000);
    long paths = cfg.get_long_or("clt.paths", 20000);
    cfg.require_all_consumed();

    CltReport report = clt_empirical_check(model, kernel, times, n, paths, env.seed);
    write_clt_report_csv(report, (env.out / "clt_report.csv").string());
    std::cout << "lambda_n: " << fmt_g17(report.lambda_n) << "\n";
    std::cout << "entries: " << report.entries.size() << "\n";
    std::cout << "all_within: " << yes_no(report.all_within) << "\n";
    return (!report.all_within && env.expect_consistent) ? 2 : 0;
}

// ------------------------------------------------------------------- simulate

int cmd_simulate(const Config& cfg, const RunEnv& env) {
    KernelSpec kernel = kernel_from_config(cfg);
    ModelSpec model = model_from_config(cfg);
    Grid grid = grid_from_config(cfg);
    long paths = cfg.get_long("sim.paths");
    std::string store = cfg.get_string_or("sim.store", "all");
    bool want_csv = cfg.get_bool_or("sim.csv", false);
    cfg.require_all_consumed();

    SimOptions opt;
    opt.threads = env.threads;
    if (store != "all")
        for (long idx : parse_long_list(store, "sim.store"))
            opt.store_nodes.push_back(static_cast<int>(idx));

    PathEnsemble ens = simulate_sve(model, kernel, grid, paths, env.seed, opt);
    save_ensemble(ens, (env.out / "ensemble.bin").string());
    if (want_csv) write_ensemble_csv(ens, (env.out / "ensemble.csv").string());

    CsvWriter csv((env.out / "summary.csv").string());
    csv.row({"time", "mean", "mean_se", "second_moment", "second_moment_se"});
    for (int i = 0; i < ens.n_times(); ++i) {
        MomentEstimate m1 = empirical_moment(ens, i, 1);
        MomentEstimate m2 = empirical_moment(ens, i, 2);
        csv.row({fmt_g17(ens.times[i]), fmt_g17(m1.estimate), fmt_g17(m1.standard_error),
                 fmt_g17(m2.estimate), fmt_g17(m2.standard_error)});
    }
    MomentEstimate final1 = empirical_moment(ens, ens.n_times() - 1, 1);
    std::cout << "paths: " << ens.n_paths << "\n";
    std::cout << "stored_nodes: " << ens.n_times() << "\n";
    std::cout << "final_mean: " << fmt_g17(final1.estimate) << " se: "
              << fmt_g17(final1.standard_error) << "\n";
    std::cout << "ensemble: " << (env.out / "ensemble.bin").string() << "\n";
    return 0;
}

// ------------------------------------------------------------------ cond-prob

int cmd_cond_prob(const Config& cfg, const RunEnv& env) {
    std::string ens_path = cfg.get_string("cond.ensemble");
    auto list_or_empty = [&](const char* key, auto parse) {
        std::string text = cfg.get_string_or(key, "");
        return text.empty() ? decltype(parse(text, key)){} : parse(text, key);
    };
    auto idx = list_or_empty("cond.obs_indices", parse_long_list);
    auto centers = list_or_empty("cond.obs_centers", parse_double_list);
    auto widths = list_or_empty("cond.obs_half_widths", parse_double_list);
    long target_index = cfg.get_long("cond.target_index");
    double target_lo = cfg.get_double("cond.target_lo");
    double target_hi = cfg.get_double("cond.target_hi");
    long min_effective = cfg.get_long_or("cond.min_effective", 200);
    cfg.require_all_consumed();
    if (idx.size() != centers.size() || idx.size() != widths.size())
        throw ConfigError("cond.obs_indices/centers/half_widths must have equal lengths");

    PathEnsemble ens = load_ensemble(ens_path);
    std::vector<BinCondition> conditioning;
    for (size_t i = 0; i < idx.size(); ++i)
        conditioning.push_back({static_cast<int>(idx[i]), centers[i], widths[i]});

    CondProbResult res = conditional_prob_estimate(ens, conditioning,
                                                   static_cast<int>(target_index),
                                                   target_lo, target_hi, min_effective);
    CsvWriter csv((env.out / "cond_prob.csv").string());
    csv.row({"probability", "ci_half_width", "n_effective"});
    csv.row({fmt_g17(res.probability), fmt_g17(res.ci_half_width),
             std::to_string(res.n_effective)});
    std::cout << "probability: " << fmt_g17(res.probability) << "\n";
    std::cout << "ci_half_width: " << fmt_g17(res.ci_half_width) << "\n";
    std::cout << "n_effective: " << res.n_effective << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"svelab: stochastic Volterra equation verification toolkit"};
    app.require_subcommand(1);

    struct SubSpec {
        std::string name;
        std::string help;
        int (*run)(const Config&, const RunEnv&);
    };
    const std::vector<SubSpec> specs = {
        {"kernel-info", "Tabulate a kernel, its integrals, and its scaling limits", cmd_kernel_info},
        {"resolvent", "Solve the kernel resolvent family and export it", cmd_resolvent},
        {"moment-check", "Closed-form moments, optionally cross-checked by Monte Carlo", cmd_moment_check},
        {"defect-sweep", "Markov-defect functionals over a (t,T) lattice", cmd_defect_sweep},
        {"doob", "Covariance factorization residual of the power-kernel Gaussian process", cmd_doob},
        {"lemma31", "Search a conditional-probability non-Markov certificate", cmd_lemma31},
        {"clt-check", "Small-time rescaling limit: covariance rows or empirical ensemble", cmd_clt_check},
        {"simulate", "Sample SVE paths and persist the ensemble", cmd_simulate},
        {"cond-prob", "Conditional bin probability from a stored ensemble", cmd_cond_prob},
    };

    struct SubState {
        CLI::App* sub = nullptr;
        int (*run)(const Config&, const RunEnv&) = nullptr;
        std::string config_path, out_dir;
        std::vector<std::string> sets;
        long seed = 1;
        long threads = 1;
        bool expect = false;
        // command-specific flag storage (only bound where registered)
        double H = 0.0, tol = 1e-10, lambda = 0.0, beta = 0.0, T = 0.0;
        double tmax = 1.0;
        long paths = 0, n = 0, mc_paths = 0, points = 200;
        std::string triple, functional, mode, ensemble;
    };
    std::vector<SubState> states(specs.size());

    for (size_t i = 0; i < specs.size(); ++i) {
        SubState& st = states[i];
        st.sub = app.add_subcommand(specs[i].name, specs[i].help);
        st.run = specs[i].run;
        st.sub->add_option("--config", st.config_path, "key=value config file");
        st.sub->add_option("--out", st.out_dir,
                           "output directory (default: $SVELAB_OUT or '.')");
        st.sub->add_option("--set", st.sets, "override a config key (key=value), repeatable");
        st.sub->add_option("--seed", st.seed, "RNG seed (config key run.seed)");
        st.sub->add_option("--threads", st.threads, "worker thread cap (config key run.threads)");
        st.sub->add_flag("--expect-consistent", st.expect,
                         "exit 2 when any verdict is 'violated'");
        const std::string& name = specs[i].name;
        if (name == "kernel-info") {
            st.sub->add_option("--tmax", st.tmax, "tabulation horizon (info.t_max)");
            st.sub->add_option("--points", st.points, "tabulation rows (info.points)");
        } else if (name == "resolvent") {
            st.sub->add_option("--beta", st.beta, "drift slope (resolvent.beta)");
            st.sub->add_option("--lambda", st.lambda, "initial-curve rate (resolvent.lambda)");
        } else if (name == "moment-check") {
            st.sub->add_option("--T", st.T, "moment horizon (moment.T)");
            st.sub->add_option("--mc-paths", st.mc_paths, "Monte Carlo paths (moment.mc_paths)");
        } else if (name == "defect-sweep") {
            st.sub->add_option("--lambda", st.lambda, "initial-curve rate (sweep.lambda)");
            st.sub->add_option("--functional", st.functional,
                               "first|sqrt|linear|all (sweep.functional)");
        } else if (name == "doob") {
            st.sub->add_option("--H", st.H, "Hurst parameter (doob.H)");
            st.sub->add_option("--triple", st.triple, "times s,t,u (doob.triple)");
            st.sub->add_option("--tol", st.tol, "consistency tolerance (doob.tol)");
        } else if (name == "lemma31") {
            st.sub->add_option("--H", st.H, "Hurst parameter (lemma.H)");
        } else if (name == "clt-check") {
            st.sub->add_option("--n", st.n, "rescaling index (clt.n)");
            st.sub->add_option("--paths", st.paths, "ensemble paths (clt.paths)");
            st.sub->add_option("--mode", st.mode, "empirical|limit (clt.mode)");
        } else if (name == "simulate") {
            st.sub->add_option("--paths", st.paths, "ensemble paths (sim.paths)");
        } else if (name == "cond-prob") {
            st.sub->add_option("--ensemble", st.ensemble, "ensemble file (cond.ensemble)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const SubState* active = nullptr;
    for (const auto& st : states)
        if (st.sub->parsed()) active = &st;
    if (!active) {
        std::cerr << "error: no subcommand\n";
        return 1;
    }

    try {
        Config cfg = active->config_path.empty()
                         ? Config::parse_text("", "<flags>")
                         : Config::parse_file(active->config_path);
        for (const auto& kv : active->sets) {
            auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ConfigError("--set expects key=value, got \"" + kv + "\"");
            cfg.override_value(kv.substr(0, eq), kv.substr(eq + 1));
        }
        auto fold_if = [&](const char* flag, const std::string& key, const std::string& value) {
            const CLI::Option* opt = active->sub->get_option_no_throw(flag);
            if (opt && opt->count() > 0) cfg.override_value(key, value);
        };
        fold_if("--seed", "run.seed", std::to_string(active->seed));
        fold_if("--threads", "run.threads", std::to_string(active->threads));
        fold_if("--tmax", "info.t_max", fmt_g17(active->tmax));
        fold_if("--points", "info.points", std::to_string(active->points));
        fold_if("--beta", "resolvent.beta", fmt_g17(active->beta));
        const std::string name = active->sub->get_name();
        if (name == "resolvent") fold_if("--lambda", "resolvent.lambda", fmt_g17(active->lambda));
        if (name == "defect-sweep") fold_if("--lambda", "sweep.lambda", fmt_g17(active->lambda));
        fold_if("--T", "moment.T", fmt_g17(active->T));
        fold_if("--mc-paths", "moment.mc_paths", std::to_string(active->mc_paths));
        fold_if("--functional", "sweep.functional", active->functional);
        if (name == "doob") fold_if("--H", "doob.H", fmt_g17(active->H));
        if (name == "lemma31") fold_if("--H", "lemma.H", fmt_g17(active->H));
        fold_if("--triple", "doob.triple", active->triple);
        fold_if("--tol", "doob.tol", fmt_g17(active->tol));
        fold_if("--n", "clt.n", std::to_string(active->n));
        if (name == "clt-check") fold_if("--paths", "clt.paths", std::to_string(active->paths));
        if (name == "simulate") fold_if("--paths", "sim.paths", std::to_string(active->paths));
        fold_if("--mode", "clt.mode", active->mode);
        fold_if("--ensemble", "cond.ensemble", active->ensemble);

        RunEnv env;
        env.seed = static_cast<std::uint64_t>(cfg.get_long_or("run.seed", 1));
        env.threads = static_cast<int>(cfg.get_long_or("run.threads", 1));
        env.expect_consistent = active->expect;
        std::string out_dir = active->out_dir;
        if (out_dir.empty()) {
            const char* e = std::getenv("SVELAB_OUT");
            out_dir = (e && *e) ? e : ".";
        }
        env.out = fs::path(out_dir);
        fs::create_directories(env.out);
        write_resolved_config(cfg, env.out);

        return active->run(cfg, env);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
