#pragma once
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "asymptote.hpp"
#include "csv.hpp"
#include "dispersion.hpp"
#include "evolve.hpp"
#include "parallel.hpp"
#include "steady.hpp"
#include "travwave.hpp"
#include "version.hpp"

namespace nlfkpp {

// Resolved configuration of one CLI run; echoed verbatim into the manifest.
struct RunConfig {
    std::string command;
    std::string output_dir = "out";
    std::vector<std::pair<std::string, std::string>> params;

    void set(const std::string& k, const std::string& v) { params.emplace_back(k, v); }
    void set(const std::string& k, double v) { params.emplace_back(k, format_double(v)); }
    void set(const std::string& k, int v) { params.emplace_back(k, std::to_string(v)); }
};

namespace cli_detail {

inline std::filesystem::path prepare_out(RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void finish(RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::vector<std::pair<std::string, std::string>> entries;
    entries.emplace_back("command", cfg.command);
    entries.emplace_back("version", version);
    entries.emplace_back("output_dir", cfg.output_dir);
    for (auto& kv : cfg.params) entries.push_back(kv);
    write_manifest((dir / "manifest.txt").string(), entries);
}

struct EvolveArgs {
    double D = 1e-3;
    std::string scheme = "u";
    double L = 0.0;
    int n = 0;
    double t_end = 0.0;
    double dt_max = 0.05;
    double max_change = 1e-2;
    double A = 0.01;
    double w = 0.1;
    std::string kind = "bump";
    std::vector<double> snaps;
};

inline int run_evolve(RunConfig cfg, const EvolveArgs& a) {
    EvolveConfig ec;
    ec.D = a.D;
    ec.scheme = (a.scheme == "w") ? Scheme::W_FORM : Scheme::U_FORM;
    ec.L = a.L > 0.0 ? a.L : (ec.scheme == Scheme::U_FORM ? 10.0 : 40.0);
    ec.n = a.n > 0 ? a.n : (ec.scheme == Scheme::U_FORM ? 1000 : 1 << 15);
    ec.t_end = a.t_end > 0.0 ? a.t_end : 9.0 / (2.0 * std::sqrt(a.D));
    ec.dt_max = a.dt_max;
    ec.max_change = a.max_change;
    InitialData init;
    init.A = a.A;
    init.w = a.w;
    init.kind = (a.kind == "gaussian" || ec.scheme == Scheme::W_FORM) ? InitialKind::GAUSSIAN
                                                                      : InitialKind::COMPACT_BUMP;
    cfg.set("D", ec.D);
    cfg.set("scheme", ec.scheme == Scheme::U_FORM ? "u" : "w");
    cfg.set("L", ec.L);
    cfg.set("n", ec.n);
    cfg.set("t_end", ec.t_end);
    cfg.set("dt_max", ec.dt_max);
    cfg.set("max_change", ec.max_change);
    cfg.set("A", init.A);
    cfg.set("kind", init.kind == InitialKind::GAUSSIAN ? "gaussian" : "bump");
    if (init.kind == InitialKind::GAUSSIAN) cfg.set("w", init.w);

    auto dir = prepare_out(cfg);
    EvolveResult res = run(init, ec, a.snaps);

    CsvTable diag;
    diag.header = {"time", "front", "wavelength", "u_max", "mass"};
    for (size_t i = 0; i < res.diagnostics.times.size(); ++i)
        diag.rows.push_back({res.diagnostics.times[i], res.diagnostics.front_position[i],
                             res.diagnostics.wavelength[i], res.diagnostics.u_max[i],
                             res.diagnostics.mass[i]});
    write_csv((dir / "diagnostics.csv").string(), diag);

    auto snap_csv = [&](const std::string& name, const Field& f) {
        CsvTable t;
        t.header = {"x", f.representation == Representation::LOG_U ? "log10_u" : "u"};
        const double ln10 = std::log(10.0);
        for (int i = 0; i < f.grid.n; ++i) {
            double v = f.values[static_cast<size_t>(i)];
            t.rows.push_back({f.grid.x(i), f.representation == Representation::LOG_U ? v / ln10 : v});
        }
        write_csv((dir / name).string(), t);
    };
    for (auto& [t, f] : res.snapshots) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_t%g.csv", t);
        snap_csv(name, f);
    }
    snap_csv("final.csv", res.final_field);
    finish(cfg);
    return 0;
}

inline int run_dispersion(RunConfig cfg, double D, double k_max, int k_steps) {
    cfg.set("D", D);
    cfg.set("k_max", k_max);
    cfg.set("k_steps", k_steps);
    auto dir = prepare_out(cfg);
    CsvTable t;
    t.header = {"k", "w0", "w1"};
    for (int i = 0; i <= k_steps; ++i) {
        double k = k_max * i / k_steps;
        t.rows.push_back({k, w0(k, D), w1(k, D)});
    }
    write_csv((dir / "dispersion.csv").string(), t);

    CsvTable c;
    c.header = {"Delta_1", "delta_1", "k0", "k_m", "w1_at_km"};
    double km = std::nan(""), wm = std::nan("");
    if (D < delta1()) {
        MostUnstable mu = most_unstable_k(D);
        km = mu.k_m;
        wm = mu.w1_at_km;
    }
    c.rows.push_back({delta1(), delta_turning_point(1), k0_root(), km, wm});
    write_csv((dir / "constants.csv").string(), c);
    finish(cfg);
    return 0;
}

inline int run_tongues(RunConfig cfg, int imax, int points, double d_min) {
    cfg.set("imax", imax);
    cfg.set("points", points);
    cfg.set("d_min", d_min);
    auto dir = prepare_out(cfg);
    TongueAtlas atlas = TongueAtlas::build(imax, points, d_min);
    CsvTable t;
    t.header = {"i", "D", "lambda_minus", "lambda_plus", "Delta_i", "delta_2i_minus_1"};
    for (const auto& r : atlas.rows)
        t.rows.push_back({static_cast<double>(r.i), r.D, r.lambda_minus, r.lambda_plus,
                          atlas.Delta_i[static_cast<size_t>(r.i) - 1],
                          atlas.delta_2i_minus_1[static_cast<size_t>(r.i) - 1]});
    write_csv((dir / "tongues.csv").string(), t);
    finish(cfg);
    return 0;
}

inline int run_steady(RunConfig cfg, double lambda, double D, int n, int branch_tongue,
                      int branch_steps) {
    auto dir = prepare_out(cfg);
    if (branch_tongue > 0) {
        cfg.set("branch_tongue", branch_tongue);
        cfg.set("D", D);
        cfg.set("branch_steps", branch_steps);
        auto branch = continue_branch(branch_tongue, D, branch_steps);
        CsvTable t;
        t.header = {"lambda", "D", "alpha", "u_max", "converged"};
        for (const auto& b : branch)
            t.rows.push_back({b.lambda, b.D, b.alpha, b.u_max, b.converged ? 1.0 : 0.0});
        write_csv((dir / "branch.csv").string(), t);
    } else {
        cfg.set("lambda", lambda);
        cfg.set("D", D);
        if (n > 0) cfg.set("n", n);
        PeriodicState s = solve_at(lambda, D, SteadySeed::weakly_nonlinear(), n);
        CsvTable t;
        t.header = {"x", "F"};
        double h = s.dx();
        for (size_t i = 0; i < s.half_profile.size(); ++i)
            t.rows.push_back({static_cast<double>(i) * h, s.half_profile[i]});
        write_csv((dir / "profile.csv").string(), t);
        CsvTable sum;
        sum.header = {"lambda", "D", "alpha", "u_max", "mass"};
        sum.rows.push_back({s.lambda, s.D, s.alpha, s.u_max, s.mass});
        write_csv((dir / "state.csv").string(), sum);
    }
    finish(cfg);
    return 0;
}

struct AsymptoteArgs {
    std::string what = "table";
    double xl = 8.0, xr = 6.0;
    int n = 4000;
    std::vector<double> lambda_bars;
    int tongue = 1;
    double lambda = 0.75;
};

inline int run_asymptote(RunConfig cfg, const AsymptoteArgs& a) {
    cfg.set("what", a.what);
    auto dir = prepare_out(cfg);
    if (a.what == "layer") {
        cfg.set("xl", a.xl);
        cfg.set("xr", a.xr);
        cfg.set("n", a.n);
        TransitionLayer tl = solve_transition_layer(a.xl, a.xr, a.n);
        CsvTable t;
        t.header = {"X", "psi"};
        for (size_t i = 0; i < tl.X.size(); ++i) t.rows.push_back({tl.X[i], tl.psi[i]});
        write_csv((dir / "psi.csv").string(), t);
        CsvTable s;
        s.header = {"l", "residual"};
        s.rows.push_back({tl.l, tl.residual});
        write_csv((dir / "layer_summary.csv").string(), s);
    } else if (a.what == "spike") {
        std::vector<double> lbs = a.lambda_bars;
        if (lbs.empty()) lbs = {0.5, 1.0, 2.0, 4.0, 5.8, 8.0, 10.0, 50.0, 100.0};
        CsvTable sum;
        sum.header = {"lambda_bar", "v0", "I_tot", "sigma_inf", "small_asymptote", "large_asymptote"};
        std::vector<SpikeSolution> sols(lbs.size());
        parallel_for(lbs.size(), [&](size_t i) { sols[i] = solve_spike(lbs[i]); });
        for (size_t i = 0; i < lbs.size(); ++i) {
            const SpikeSolution& sp = sols[i];
            char name[64];
            std::snprintf(name, sizeof(name), "spike_lb%g.csv", sp.lambda_bar);
            CsvTable t;
            t.header = {"X", "v"};
            for (size_t q = 0; q < sp.X.size(); ++q) t.rows.push_back({sp.X[q], sp.v[q]});
            write_csv((dir / name).string(), t);
            sum.rows.push_back({sp.lambda_bar, sp.v0, sp.I_tot, sp.sigma_inf, sp.lambda_bar / 48.0,
                                M_PI / (2.0 * sp.lambda_bar)});
        }
        write_csv((dir / "spike_summary.csv").string(), sum);
    } else if (a.what == "region1") {
        cfg.set("i", a.tongue);
        cfg.set("lambda", a.lambda);
        RegionIProfile p = region1_profile(a.tongue, a.lambda);
        CsvTable t;
        t.header = {"x", "F0"};
        for (int q = 0; q <= 400; ++q) {
            double x = p.S_bar * q / 400.0;
            t.rows.push_back({x, p.F0(x)});
        }
        write_csv((dir / "region1.csv").string(), t);
    } else if (a.what == "wkb") {
        cfg.set("lambda", a.lambda);
        CsvTable t;
        t.header = {"x", "Phi"};
        double lo = 0.5 * (a.lambda - 0.5), hi = 0.5 * a.lambda;
        for (int q = 0; q <= 200; ++q) {
            double x = lo + (hi - lo) * q / 200.0;
            t.rows.push_back({x, wkb_exponent(a.lambda, x)});
        }
        write_csv((dir / "wkb.csv").string(), t);
    } else {  // summary table
        TransitionLayer tl = solve_transition_layer(8.0, 6.0, 2000);
        CsvTable s;
        s.header = {"l_star", "I_tilde", "v_tilde0", "Phi0_lambda_0p75"};
        s.rows.push_back({tl.l, sech2_eigenvalue(), sech2_limit(0.0), wkb_phi0(0.75)});
        write_csv((dir / "asymptote_summary.csv").string(), s);
    }
    finish(cfg);
    return 0;
}

struct TwArgs {
    double D = 0.0;
    double v = 0.0;
    double Lm = 0.0, Lp = 0.0;
    int n = 0;
    std::vector<int> sigma_n;
    double d_min = 1e-4, d_max = 0.1;
    int d_points = 60;
    bool threshold = false;
};

inline int run_tw(RunConfig cfg, const TwArgs& a) {
    auto dir = prepare_out(cfg);
    if (a.threshold) {
        OscillationThreshold th = find_oscillation_threshold();
        CsvTable t;
        t.header = {"sigma_plus", "D_plus", "residual1", "residual2"};
        t.rows.push_back({th.sigma_plus, th.D_plus, th.residual1, th.residual2});
        write_csv((dir / "threshold.csv").string(), t);
        std::cout << "sigma_plus=" << format_double(th.sigma_plus)
                  << " D_plus=" << format_double(th.D_plus) << "\n";
    }
    if (!a.sigma_n.empty()) {
        cfg.set("d_min", a.d_min);
        cfg.set("d_max", a.d_max);
        cfg.set("d_points", a.d_points);
        std::vector<double> grid;
        for (int q = 0; q < a.d_points; ++q)
            grid.push_back(a.d_min * std::pow(a.d_max / a.d_min, static_cast<double>(q) / (a.d_points - 1)));
        CsvTable t;
        t.header = {"n", "D", "Re_sigma", "Im_sigma"};
        for (int nn : a.sigma_n) {
            ComplexRootPath p = sigma_path(nn, grid);
            for (size_t q = 0; q < p.D.size(); ++q)
                t.rows.push_back({static_cast<double>(nn), p.D[q], p.sigma[q].real(), p.sigma[q].imag()});
        }
        write_csv((dir / "sigma_path.csv").string(), t);
    }
    if (a.D > 0.0) {
        cfg.set("D", a.D);
        if (a.v > 0.0) cfg.set("v", a.v);
        TWProfile tw = solve_tptw(a.D, a.v, a.Lm, a.Lp, a.n);
        CsvTable t;
        t.header = {"z", "u"};
        for (size_t q = 0; q < tw.z.size(); ++q) t.rows.push_back({tw.z[q], tw.u[q]});
        write_csv((dir / "tw_profile.csv").string(), t);
        CsvTable s;
        s.header = {"D", "v", "tail_oscillatory", "a", "b", "residual"};
        s.rows.push_back({tw.D, tw.v, tw.tail.tail_class == TailClass::OSCILLATORY ? 1.0 : 0.0,
                          tw.tail.a, tw.tail.b, tw.residual});
        write_csv((dir / "tw_summary.csv").string(), s);
    }
    finish(cfg);
    return 0;
}

int run_repro(RunConfig cfg, const std::string& target);  // defined below

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"nonlocal Fisher-KPP (top hat kernel) solver suite"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags override file values");
    app.allow_config_extras(false);

    RunConfig cfg;

    auto add_out = [&cfg](CLI::App* sub) {
        sub->add_option("--out", cfg.output_dir, "output directory")->capture_default_str();
    };

    // evolve
    cli_detail::EvolveArgs ea;
    CLI::App* evolve = app.add_subcommand("evolve", "time evolution of the Cauchy problem");
    evolve->add_option("--D", ea.D, "diffusivity")->required()->check(CLI::PositiveNumber);
    evolve->add_option("--scheme", ea.scheme, "u | w")->check(CLI::IsMember({"u", "w"}));
    evolve->add_option("--L", ea.L, "half-domain (u) or period (w)")->check(CLI::PositiveNumber);
    evolve->add_option("--n", ea.n, "grid cells")->check(CLI::PositiveNumber);
    evolve->add_option("--t-end", ea.t_end, "final time (default 9/(2 sqrt D))")->check(CLI::PositiveNumber);
    evolve->add_option("--dt-max", ea.dt_max)->check(CLI::PositiveNumber);
    evolve->add_option("--max-change", ea.max_change)->check(CLI::PositiveNumber);
    evolve->add_option("--A", ea.A, "initial amplitude")->check(CLI::PositiveNumber);
    evolve->add_option("--w", ea.w, "gaussian width")->check(CLI::PositiveNumber);
    evolve->add_option("--kind", ea.kind, "bump | gaussian")->check(CLI::IsMember({"bump", "gaussian"}));
    evolve->add_option("--snap", ea.snaps, "snapshot times");
    add_out(evolve);

    // dispersion
    double di_D = 1e-3, di_kmax = 25.0;
    int di_ksteps = 500;
    CLI::App* disp = app.add_subcommand("dispersion", "growth relations and stability constants");
    disp->add_option("--D", di_D)->required()->check(CLI::PositiveNumber);
    disp->add_option("--k-max", di_kmax)->check(CLI::PositiveNumber);
    disp->add_option("--k-steps", di_ksteps)->check(CLI::PositiveNumber);
    add_out(disp);

    // tongues
    int to_imax = 4, to_points = 60;
    double to_dmin = 1e-9;
    CLI::App* tong = app.add_subcommand("tongues", "bifurcation tongue atlas CSV");
    tong->add_option("--imax", to_imax)->check(CLI::PositiveNumber);
    tong->add_option("--points", to_points)->check(CLI::PositiveNumber);
    tong->add_option("--d-min", to_dmin)->check(CLI::PositiveNumber);
    add_out(tong);

    // steady
    double st_lambda = 0.75, st_D = 1e-4;
    int st_n = 0, st_branch = 0, st_steps = 200;
    CLI::App* steady = app.add_subcommand("steady", "periodic steady states and branches");
    steady->add_option("--lambda", st_lambda)->check(CLI::PositiveNumber);
    steady->add_option("--D", st_D)->required()->check(CLI::PositiveNumber);
    steady->add_option("--n", st_n, "half-period grid cells");
    steady->add_option("--branch-tongue", st_branch, "sweep this tongue instead of a single solve");
    steady->add_option("--branch-steps", st_steps)->check(CLI::PositiveNumber);
    add_out(steady);

    // asymptote
    cli_detail::AsymptoteArgs aa;
    CLI::App* asym = app.add_subcommand("asymptote", "matched-asymptotics reference problems");
    asym->add_option("--what", aa.what)->check(CLI::IsMember({"layer", "spike", "region1", "wkb", "table"}));
    asym->add_option("--xl", aa.xl)->check(CLI::PositiveNumber);
    asym->add_option("--xr", aa.xr)->check(CLI::PositiveNumber);
    asym->add_option("--n", aa.n)->check(CLI::PositiveNumber);
    asym->add_option("--lambda-bar", aa.lambda_bars, "spike rescaled wavelengths");
    asym->add_option("--i", aa.tongue)->check(CLI::PositiveNumber);
    asym->add_option("--lambda", aa.lambda)->check(CLI::PositiveNumber);
    add_out(asym);

    // tw
    cli_detail::TwArgs ta;
    CLI::App* tw = app.add_subcommand("tw", "transitional travelling waves");
    tw->add_option("--D", ta.D)->check(CLI::PositiveNumber);
    tw->add_option("--v", ta.v, "speed (default: minimum 2 sqrt D)")->check(CLI::PositiveNumber);
    tw->add_option("--Lm", ta.Lm)->check(CLI::PositiveNumber);
    tw->add_option("--Lp", ta.Lp)->check(CLI::PositiveNumber);
    tw->add_option("--n", ta.n);
    tw->add_option("--sigma", ta.sigma_n, "rear-exponent branch indices");
    tw->add_option("--d-min", ta.d_min)->check(CLI::PositiveNumber);
    tw->add_option("--d-max", ta.d_max)->check(CLI::PositiveNumber);
    tw->add_option("--d-points", ta.d_points)->check(CLI::PositiveNumber);
    tw->add_flag("--threshold", ta.threshold, "compute (sigma_+, D_+)");
    add_out(tw);

    // repro
    std::string rp_target;
    CLI::App* repro = app.add_subcommand("repro", "bundled parameter presets");
    repro->add_option("--target", rp_target, "FIG1 FIG2 FIG4 FIG5 FIG6 FIG5_1 FIG5_5 FIG5_8 TABLE_CONSTANTS")
        ->required()
        ->check(CLI::IsMember({"FIG1", "FIG2", "FIG4", "FIG5", "FIG6", "FIG5_1", "FIG5_5", "FIG5_8",
                               "TABLE_CONSTANTS"}));
    add_out(repro);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (evolve->parsed()) {
            cfg.command = "evolve";
            return cli_detail::run_evolve(cfg, ea);
        }
        if (disp->parsed()) {
            cfg.command = "dispersion";
            return cli_detail::run_dispersion(cfg, di_D, di_kmax, di_ksteps);
        }
        if (tong->parsed()) {
            cfg.command = "tongues";
            return cli_detail::run_tongues(cfg, to_imax, to_points, to_dmin);
        }
        if (steady->parsed()) {
            cfg.command = "steady";
            return cli_detail::run_steady(cfg, st_lambda, st_D, st_n, st_branch, st_steps);
        }
        if (asym->parsed()) {
            cfg.command = "asymptote";
            return cli_detail::run_asymptote(cfg, aa);
        }
        if (tw->parsed()) {
            cfg.command = "tw";
            return cli_detail::run_tw(cfg, ta);
        }
        if (repro->parsed()) {
            cfg.command = "repro";
            return cli_detail::run_repro(cfg, rp_target);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

namespace cli_detail {

inline double fitted_front_slope(const EvolveDiagnostics& d, double t_from, double t_to) {
    std::vector<double> ts, fs;
    for (size_t i = 0; i < d.times.size(); ++i) {
        if (d.times[i] >= t_from && d.times[i] <= t_to && std::isfinite(d.front_position[i])) {
            ts.push_back(d.times[i]);
            fs.push_back(d.front_position[i]);
        }
    }
    return fit_line(ts, fs).slope;
}

inline int run_repro(RunConfig cfg, const std::string& target) {
    cfg.set("target", target);
    auto dir = prepare_out(cfg);
    auto pass_line = [](std::ostream& os, const std::string& name, bool ok, const std::string& detail) {
        os << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    };

    if (target == "TABLE_CONSTANTS") {
        std::ofstream sum(dir / "summary.txt");
        double d1 = delta1();
        pass_line(sum, "Delta_1", std::abs(d1 - 0.00297) <= 2e-5, format_double(d1));
        double k0 = k0_root();
        pass_line(sum, "k0", k0 > 2.0 * M_PI && k0 < 3.0 * M_PI, format_double(k0));
        TransitionLayer tl = solve_transition_layer(8.0, 6.0, 4000);
        double lstar = -3.493 / (2.0 * M_PI * M_PI);
        pass_line(sum, "l_star", std::abs(tl.l - lstar) <= 0.01 * std::abs(lstar), format_double(tl.l));
        OscillationThreshold th = find_oscillation_threshold();
        pass_line(sum, "sigma_plus", std::abs(th.sigma_plus - 4.437) <= 1e-3, format_double(th.sigma_plus));
        pass_line(sum, "D_plus", std::abs(th.D_plus - 2.824e-2) <= 1e-3, format_double(th.D_plus));
        CsvTable t;
        t.header = {"Delta_1", "k0", "l_star", "I_tilde", "v_tilde0", "sigma_plus", "D_plus"};
        t.rows.push_back({d1, k0, tl.l, sech2_eigenvalue(), sech2_limit(0.0), th.sigma_plus, th.D_plus});
        write_csv((dir / "constants.csv").string(), t);
    } else if (target == "FIG1") {
        for (double D : {0.003, 0.001}) {
            EvolveConfig ec;
            ec.D = D;
            ec.t_end = 9.0 / (2.0 * std::sqrt(D));
            EvolveResult res = run(InitialData{}, ec);
            char name[64];
            std::snprintf(name, sizeof(name), "evolve_D%g.csv", D);
            CsvTable t;
            t.header = {"x", "u"};
            for (int i = 0; i < res.final_field.grid.n; ++i)
                t.rows.push_back({res.final_field.grid.x(i), res.final_field.values[static_cast<size_t>(i)]});
            write_csv((dir / name).string(), t);
            TWProfile tw = solve_tptw(D);
            std::snprintf(name, sizeof(name), "tw_D%g.csv", D);
            CsvTable tt;
            tt.header = {"z", "u"};
            for (size_t q = 0; q < tw.z.size(); ++q) tt.rows.push_back({tw.z[q], tw.u[q]});
            write_csv((dir / name).string(), tt);
        }
    } else if (target == "FIG2") {
        std::ofstream sum(dir / "summary.txt");
        std::vector<double> Ds = {0.001, 0.002, 0.003};
        std::vector<EvolveResult> results(Ds.size());
        parallel_for(Ds.size(), [&](size_t i) {
            EvolveConfig ec;
            ec.D = Ds[i];
            ec.t_end = 9.0 / (2.0 * std::sqrt(Ds[i]));
            results[i] = run(InitialData{}, ec);
        });
        for (size_t i = 0; i < Ds.size(); ++i) {
            const auto& d = results[i].diagnostics;
            char name[64];
            std::snprintf(name, sizeof(name), "front_D%g.csv", Ds[i]);
            CsvTable t;
            t.header = {"time", "front"};
            for (size_t q = 0; q < d.times.size(); ++q) t.rows.push_back({d.times[q], d.front_position[q]});
            write_csv((dir / name).string(), t);
            double slope = fitted_front_slope(d, 0.5 * d.times.back(), d.times.back());
            double ref = 2.0 * std::sqrt(Ds[i]);
            pass_line(sum, "front_speed_D" + format_double(Ds[i]),
                      std::abs(slope - ref) <= 0.05 * ref,
                      "slope=" + format_double(slope) + " 2sqrtD=" + format_double(ref));
        }
    } else if (target == "FIG4") {
        std::ofstream sum(dir / "summary.txt");
        for (double D : {1e-4, 1e-5}) {
            EvolveConfig ec;
            ec.D = D;
            ec.scheme = Scheme::W_FORM;
            ec.L = (D <= 1e-5) ? 30.0 : 20.0;
            ec.n = (D <= 1e-5) ? (1 << 15) : (1 << 14);
            ec.t_end = 0.8 * (0.5 * ec.L) / (2.0 * std::sqrt(D));
            InitialData init;
            init.kind = InitialKind::GAUSSIAN;
            EvolveResult res = run(init, ec);
            char name[64];
            std::snprintf(name, sizeof(name), "front_D%g.csv", D);
            CsvTable t;
            t.header = {"time", "front", "x_f"};
            const auto& d = res.diagnostics;
            for (size_t q = 0; q < d.times.size(); ++q) {
                double xf = std::nan("");
                try {
                    xf = front_predictor_xf(d.times[q], init.A, init.w, D);
                } catch (const std::exception&) {
                }
                t.rows.push_back({d.times[q], d.front_position[q], xf});
            }
            write_csv((dir / name).string(), t);
            double worst = 0.0;
            for (size_t q = 0; q < d.times.size(); ++q) {
                if (d.times[q] < 2.0 * d.times.back() / 3.0 || !std::isfinite(d.front_position[q])) continue;
                double xf = front_predictor_xf(d.times[q], init.A, init.w, D);
                worst = std::max(worst, std::abs(d.front_position[q] - xf) / xf);
            }
            pass_line(sum, "xf_agreement_D" + format_double(D), worst <= 0.03,
                      "max rel err=" + format_double(worst));
        }
    } else if (target == "FIG5") {
        CsvTable t;
        t.header = {"D", "wavelength", "most_unstable_wavelength"};
        for (double D : {2.5e-3, 2e-3, 1.5e-3, 1e-3, 5e-4}) {
            EvolveConfig ec;
            ec.D = D;
            ec.t_end = 9.0 / (2.0 * std::sqrt(D));
            EvolveResult res = run(InitialData{}, ec);
            double wl = res.diagnostics.wavelength.back();
            double lm = 2.0 * M_PI / most_unstable_k(D).k_m;
            t.rows.push_back({D, wl, lm});
        }
        for (double D : {1e-4, 1e-5}) {
            EvolveConfig ec;
            ec.D = D;
            ec.scheme = Scheme::W_FORM;
            ec.L = (D <= 1e-5) ? 30.0 : 20.0;
            ec.n = (D <= 1e-5) ? (1 << 15) : (1 << 14);
            ec.t_end = 0.8 * (0.5 * ec.L) / (2.0 * std::sqrt(D));
            InitialData init;
            init.kind = InitialKind::GAUSSIAN;
            EvolveResult res = run(init, ec);
            t.rows.push_back({D, res.diagnostics.wavelength.back(), 2.0 * M_PI / most_unstable_k(D).k_m});
        }
        write_csv((dir / "wavelength.csv").string(), t);
    } else if (target == "FIG6") {
        CsvTable t;
        t.header = {"D", "u_max", "inverse_height", "v0_over_sqrtD"};
        SpikeSolution sp = solve_spike(10.0);
        for (double D : {1e-3, 1e-4, 1e-5}) {
            PeriodicState s = solve_at(0.5 + 10.0 * std::sqrt(D), D);
            t.rows.push_back({D, s.u_max, 1.0 / s.u_max, sp.v0 / std::sqrt(D)});
        }
        write_csv((dir / "spike_height.csv").string(), t);
    } else if (target == "FIG5_1") {
        std::vector<double> Ds = {2e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6};
        std::vector<std::vector<BranchPoint>> branches(Ds.size());
        parallel_for(Ds.size(), [&](size_t i) { branches[i] = continue_branch(1, Ds[i], 120); });
        CsvTable t;
        t.header = {"lambda", "D", "alpha", "u_max", "converged"};
        for (const auto& br : branches)
            for (const auto& b : br)
                t.rows.push_back({b.lambda, b.D, b.alpha, b.u_max, b.converged ? 1.0 : 0.0});
        write_csv((dir / "bifurcation.csv").string(), t);
    } else if (target == "FIG5_5") {
        std::vector<double> Ds = {1e-3, 1e-4, 1e-5, 1e-6};
        std::vector<PeriodicState> states(Ds.size());
        parallel_for(Ds.size(), [&](size_t i) { states[i] = solve_at(0.75, Ds[i]); });
        for (const auto& s : states) {
            char name[64];
            std::snprintf(name, sizeof(name), "profile_D%g.csv", s.D);
            CsvTable t;
            t.header = {"x", "F", "F0_leading"};
            RegionIProfile p = region1_profile(1, 0.75);
            double h = s.dx();
            for (size_t q = 0; q < s.half_profile.size(); ++q) {
                double x = static_cast<double>(q) * h;
                t.rows.push_back({x, s.half_profile[q], p.F0(x)});
            }
            write_csv((dir / name).string(), t);
        }
    } else if (target == "FIG5_8") {
        std::vector<double> lbs = {0.5, 1.0, 2.0, 4.0, 5.8, 8.0, 10.0, 50.0, 100.0};
        std::vector<SpikeSolution> sols(lbs.size());
        parallel_for(lbs.size(), [&](size_t i) { sols[i] = solve_spike(lbs[i]); });
        CsvTable t;
        t.header = {"lambda_bar", "v0", "small_asymptote", "large_asymptote"};
        for (const auto& sp : sols)
            t.rows.push_back({sp.lambda_bar, sp.v0, sp.lambda_bar / 48.0, M_PI / (2.0 * sp.lambda_bar)});
        write_csv((dir / "v0.csv").string(), t);
    }
    finish(cfg);
    return 0;
}

}  // namespace cli_detail
}  // namespace nlfkpp
