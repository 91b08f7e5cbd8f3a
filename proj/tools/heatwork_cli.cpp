// heatwork command-line front end. See README.md for the subcommands.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "heatwork/run.hpp"

using namespace heatwork;

namespace {

struct Common {
    std::string config_file, preset_name, backend, out;
    int n_max = -1;
    double tol = -1.0;
    unsigned threads = 0;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_file, "key = value configuration file");
    app->add_option("--preset", c.preset_name, "figure preset: fig2a, fig2c, fig3, fig4");
    app->add_option("--backend", c.backend, "analytic | ode | fock");
    app->add_option("--n-max", c.n_max, "Fock cutoff per mode");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--tol", c.tol, "ODE / fixed-point tolerance");
    app->add_option("--threads", c.threads, "worker threads");
    app->add_option("--set", c.sets, "override any config key: --set key=value");
}

// preset, then config file, then flags
RunConfig build_config(const Common& c) {
    RunConfig cfg = c.preset_name.empty() ? RunConfig{} : preset(c.preset_name);
    if (!c.config_file.empty()) {
        std::ifstream in(c.config_file);
        if (!in) throw config_error("cannot read config file '" + c.config_file + "'");
        read_config(in, cfg, c.config_file);
    }
    if (!c.backend.empty()) cfg.backend = c.backend;
    if (c.n_max >= 0) cfg.n_max = c.n_max;
    if (!c.out.empty()) cfg.out = c.out;
    if (c.tol > 0.0) cfg.tol = c.tol;
    if (c.threads > 0) cfg.threads = c.threads;
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw config_error("--set expects key=value, got '" + s + "'");
        try {
            set_key(cfg, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
        } catch (const config_error& e) {
            throw config_error("--set " + s + ": " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

void report(const RunResult& r) {
    for (const auto& f : r.files) std::cout << "wrote " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heat and work statistics of a two-resonator heat engine"};
    app.set_version_flag("--version", std::string("heatwork ") + HEATWORK_VERSION);
    app.require_subcommand(1);
    Common common;

    auto* cgf = app.add_subcommand("cgf", "tabulate S(chi, lambda)/t on a grid");
    auto* invert = app.add_subcommand("invert", "invert to P(q), P(w), P(q,w) or P(Delta)");
    std::vector<std::string> kinds{"q", "w", "joint", "delta"};
    invert->add_option("--kind", kinds, "distributions to compute: q w joint delta")->capture_default_str();
    auto* cumulants = app.add_subcommand("cumulants", "finite-difference cumulant table");
    auto* verify = app.add_subcommand("verify", "thermodynamic checks (first law, FT, TUR, second law)");
    auto* measure = app.add_subcommand("measure", "measured distributions (weak and back-action paths)");
    bool weak_only = false;
    measure->add_flag("--weak-only", weak_only, "skip the back-action path");
    auto* figures = app.add_subcommand("figures", "regenerate the figure datasets");
    for (auto* sub : {cgf, invert, cumulants, verify, measure, figures}) add_common(sub, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        RunResult r;
        if (figures->parsed()) {
            const std::vector<std::string> names =
                common.preset_name.empty() ? std::vector<std::string>{"fig2a", "fig2c", "fig3", "fig4"}
                                           : std::vector<std::string>{common.preset_name};
            for (const auto& name : names) {
                Common each = common;
                each.preset_name = name;
                const auto one = run_figure(build_config(each), name);
                r.files.insert(r.files.end(), one.files.begin(), one.files.end());
                r.summary[name] = one.summary;
            }
        } else {
            const RunConfig cfg = build_config(common);
            if (cgf->parsed()) r = run_cgf(cfg);
            if (invert->parsed()) r = run_invert(cfg, kinds);
            if (cumulants->parsed()) r = run_cumulants(cfg);
            if (verify->parsed()) r = run_verify(cfg);
            if (measure->parsed()) r = run_measure(cfg, !weak_only);
        }
        report(r);
        std::cout << r.summary.dump(2) << '\n';
        if (r.status == exit_verification) std::cerr << "verification failed\n";
        return r.status;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    }
}
