#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "closed_forms.hpp"
#include "config.hpp"
#include "cumulants.hpp"
#include "inversion.hpp"
#include "measurement.hpp"
#include "provider.hpp"
#include "thermo_checks.hpp"

#ifndef HEATWORK_VERSION
#define HEATWORK_VERSION "0.1.0"
#endif

namespace heatwork {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_numeric = 3, exit_verification = 4 };

struct RunResult {
    int status = exit_ok;
    std::vector<std::string> files;
    nlohmann::json summary;
};

inline std::unique_ptr<CgfProvider> make_provider(const RunConfig& c, double gamma = 0.0) {
    if (c.backend == "analytic") {
        if (gamma != 0.0) throw config_error("the analytic backend has no back-action (gamma = 0 only)");
        return std::make_unique<AnalyticProvider>(c.params);
    }
    if (c.backend == "ode") return std::make_unique<FlowProvider>(c.params, gamma, FlowMethod::fixed_point, 150.0, c.tol);
    if (c.backend == "fock") {
        if (c.n_max < 1) throw config_error("the fock backend needs n_max >= 1");
        return std::make_unique<FockProvider>(c.params, c.n_max, gamma);
    }
    throw config_error("unknown backend '" + c.backend + "'");
}

// Output files with a metadata header: version, command and the full config.
class OutputDir {
public:
    OutputDir(const RunConfig& c, std::string command) : config_(c), command_(std::move(command)), root_(c.out) {
        std::error_code ec;
        std::filesystem::create_directories(root_, ec);
        if (ec || !std::filesystem::is_directory(root_))
            throw config_error("cannot create output directory '" + c.out + "'");
    }

    std::string header() const {
        std::ostringstream os;
        os << "# heatwork " << HEATWORK_VERSION << "\n# command: " << command_ << '\n';
        std::istringstream cfg(to_config_string(config_));
        for (std::string line; std::getline(cfg, line);) os << "# " << line.substr(0, line.find("  #")) << '\n';
        return os.str();
    }

    nlohmann::json meta() const {
        nlohmann::json m;
        m["version"] = HEATWORK_VERSION;
        m["command"] = command_;
        for (const auto& k : detail::config_keys()) m["config"][k.name] = k.get(config_);
        return m;
    }

    template <class Writer>
    std::string write(const std::string& name, Writer&& body) {
        const auto path = root_ / name;
        std::ofstream os(path);
        if (!os) throw config_error("cannot write '" + path.string() + "'");
        os.imbue(std::locale::classic());
        body(os);
        if (!os) throw config_error("write failed for '" + path.string() + "'");
        files_.push_back(path.string());
        return path.string();
    }

    void write_json(const std::string& name, nlohmann::json j) {
        j["meta"] = meta();
        write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    RunConfig config_;
    std::string command_;
    std::filesystem::path root_;
    std::vector<std::string> files_;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

inline nlohmann::json density_summary(const Density& d) {
    const auto m = moments(d);
    return {{"mass", m.mass},
            {"mean", m.mean},
            {"variance", m.variance},
            {"third", m.third},
            {"min", *std::min_element(d.values.begin(), d.values.end())},
            {"imag_residue", d.imag_residue},
            {"meta", meta_json(d.meta)}};
}

inline nlohmann::json joint_summary(const JointQPD& j) {
    auto edge = [&](arma::uword r) { return arma::accu(arma::abs(j.values.row(r))) * j.w_grid.spacing; };
    return {{"mass", total_mass(j)},
            {"edge_row_abs_mass", std::max(edge(0), edge(j.values.n_rows - 1))},
            {"min", j.values.min()},
            {"off_diagonal_mass", off_diagonal_mass(j)},
            {"imag_residue", j.imag_residue},
            {"meta", meta_json(j.meta)}};
}

// Columns x,value,<extra> for a density plus a reference curve.
template <class F>
void write_with_reference(std::ostream& os, const std::string& header, const Density& d, const std::string& x,
                          const std::string& ref, F&& reference) {
    os << header << "# " << meta_json(d.meta).dump() << '\n' << x << ",value," << ref << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < d.values.size(); ++i)
        os << d.grid.at(i) << ',' << d.values[i] << ',' << reference(d.grid.at(i)) << '\n';
}

inline std::string plot_stub(const std::string& csv, const std::string& kind) {
    std::ostringstream os;
    os << "# gnuplot script; data in " << csv << " (lines starting with '#' are metadata)\n"
       << "set datafile separator ','\nset key autotitle columnhead\n";
    if (kind == "joint")
        os << "set view map\nset xlabel 'w'\nset ylabel 'q'\nsplot '" << csv << "' using 2:1:3 with image\n";
    else if (kind == "pair")
        os << "plot '" << csv << "' using 1:2 with lines, '' using 1:3 with lines dashtype 2\n";
    else
        os << "plot '" << csv << "' using 1:2 with impulses\n";
    return os.str();
}

}  // namespace detail

inline RunResult run_cgf(const RunConfig& c) {
    OutputDir out(c, "cgf");
    const auto provider = make_provider(c);
    const auto chis = detail::linspace(c.cgf_chi_min, c.cgf_chi_max, c.cgf_points);
    const auto lams = detail::linspace(c.cgf_lambda_min, c.cgf_lambda_max, c.cgf_points);
    nlohmann::json table = nlohmann::json::array();
    std::vector<cplx> values;
    for (double x : chis)
        for (double l : lams) {
            const cplx s = provider->rate(x, l);
            values.push_back(s);
            table.push_back({{"chi", x}, {"lambda", l}, {"re", s.real()}, {"im", s.imag()}});
        }
    if (c.csv)
        out.write("cgf.csv", [&](std::ostream& os) {
            os << out.header() << "# S(chi, lambda) / t from backend " << provider->name() << "\nchi,lambda,re,im\n";
            os.precision(17);
            std::size_t k = 0;
            for (double x : chis)
                for (double l : lams) {
                    os << x << ',' << l << ',' << values[k].real() << ',' << values[k].imag() << '\n';
                    ++k;
                }
        });
    RunResult r;
    r.summary = {{"backend", provider->name()}, {"per_unit_time", true}, {"table", table}};
    if (c.json) out.write_json("cgf.json", r.summary);
    r.files = out.files();
    return r;
}

inline RunResult run_invert(const RunConfig& c, const std::vector<std::string>& kinds) {
    OutputDir out(c, "invert");
    const auto provider = make_provider(c);
    const auto opt = c.inversion();
    RunResult r;
    for (const auto& kind : kinds) {
        if (kind == "q") {
            const auto d = marginal_q(*provider, c.t, c.q_min, c.q_max, opt);
            if (c.csv) out.write("p_q.csv", [&](std::ostream& os) { write_csv(os, d, out.header()); });
            double mass = 0;
            for (double v : d.mass) mass += v;
            r.summary["q"] = {{"mass", mass}, {"imag_residue", d.imag_residue}, {"meta", meta_json(d.meta)}};
        } else if (kind == "w") {
            const auto d = marginal_w(*provider, c.t, c.w_grid(), opt);
            if (c.csv) out.write("p_w.csv", [&](std::ostream& os) { write_csv(os, d, "w", out.header()); });
            r.summary["w"] = detail::density_summary(d);
        } else if (kind == "joint") {
            const auto j = joint(*provider, c.t, c.q_min, c.q_max, c.w_grid(), opt);
            if (c.csv) out.write("p_qw.csv", [&](std::ostream& os) { write_csv(os, j, out.header()); });
            r.summary["joint"] = detail::joint_summary(j);
        } else if (kind == "delta") {
            const auto d = delta_dist(*provider, c.t, c.delta_grid(), opt);
            if (c.csv) out.write("p_delta.csv", [&](std::ostream& os) { write_csv(os, d, "delta", out.header()); });
            r.summary["delta"] = detail::density_summary(d);
        } else {
            throw config_error("unknown distribution '" + kind + "' (q, w, joint, delta)");
        }
    }
    if (c.json) out.write_json("invert.json", r.summary);
    r.files = out.files();
    return r;
}

inline RunResult run_cumulants(const RunConfig& c) {
    OutputDir out(c, "cumulants");
    const auto provider = make_provider(c);
    const CumulantTable table = cumulants_fd(*provider, c.cumulant_order);
    RunResult r;
    r.summary = to_json(table);
    r.summary["t"] = c.t;
    r.summary["scaled"] = to_json(scaled(table, c.t));
    // deviation from the closed forms (orders <= 3 exist in closed form)
    const CumulantTable exact = cumulants_analytic(c.params);
    double worst12 = 0.0;
    for (const auto& [key, e] : table.entries) {
        const auto it = exact.entries.find(key);
        if (it == exact.entries.end()) continue;
        const double ref = it->second.value.real();
        const double rel = std::abs(e.value.real() - ref) / std::max(std::abs(ref), 1e-300);
        r.summary["deviation_from_closed_form"].push_back({{"k", key.first}, {"m", key.second}, {"relative", rel}});
        if (key.first + key.second <= 2) worst12 = std::max(worst12, rel);
    }
    r.summary["max_relative_deviation_orders_1_2"] = worst12;
    if (c.json) out.write_json("cumulants.json", r.summary);
    if (c.csv)
        out.write("cumulants.csv", [&](std::ostream& os) {
            os << out.header() << "# per unit time; multiply by t for totals\nk,m,re,im,uncertainty,provenance\n";
            os.precision(17);
            for (const auto& [key, e] : table.entries)
                os << key.first << ',' << key.second << ',' << e.value.real() << ',' << e.value.imag() << ','
                   << e.uncertainty << ',' << to_string(e.provenance) << '\n';
        });
    r.files = out.files();
    return r;
}

inline RunResult run_verify(const RunConfig& c) {
    OutputDir out(c, "verify");
    const auto provider = make_provider(c);
    std::vector<LawReport> reports;
    const auto [mean, dist] = first_law_report(*provider, c.t);
    reports.push_back(mean);
    reports.push_back(dist);
    FluctuationOptions fo;
    fo.resolution = c.resolution > 0.0 ? c.resolution : 0.05;
    reports.push_back(fluctuation_theorem_report(*provider, c.t, 20, fo));
    // at long times the negative-q side holds almost no mass; a short run populates it
    if (c.t > 20.0) reports.push_back(fluctuation_theorem_report(*provider, 20.0, 8, fo));
    const auto [tur, second] = tur_and_second_law_report(c.params, c.t);
    reports.push_back(tur);
    reports.push_back(second);
    const auto sweep = tur_sweep(c.threads);
    double worst_sweep = INFINITY;
    bool sweep_ok = true;
    for (const auto& s : sweep) {
        sweep_ok = sweep_ok && s.passed();
        if (!s.degenerate) worst_sweep = std::min(worst_sweep, s.margins.at("margin"));
    }
    RunResult r;
    bool ok = sweep_ok;
    for (const auto& rep : reports) {
        r.summary["reports"].push_back(to_json(rep));
        ok = ok && rep.passed();
    }
    r.summary["tur_sweep"] = {{"points", sweep.size()}, {"all_hold", sweep_ok}, {"smallest_margin", worst_sweep}};
    r.summary["all_passed"] = ok;
    if (c.json) out.write_json("verify.json", r.summary);
    r.status = ok ? exit_ok : exit_verification;
    r.files = out.files();
    return r;
}

// Weak path on the joint plus the back-action path on P_m(w).
inline RunResult run_measure(const RunConfig& c, bool full_path = true) {
    OutputDir out(c, "measure");
    const auto provider = make_provider(c);
    InversionOptions opt = c.inversion();
    if (!(opt.resolution > 0.0) || opt.resolution > c.detector.sigma) opt.resolution = std::min(0.05, c.detector.sigma);
    const auto qpd = joint(*provider, c.t, c.q_min, c.q_max, c.w_grid(), opt);
    const auto weak = weak_measured_joint(qpd, c.detector);
    RunResult r;
    if (c.csv) out.write("measured_joint.csv", [&](std::ostream& os) { write_csv(os, weak, out.header()); });
    r.summary["weak"] = detail::joint_summary(weak);
    r.summary["unmeasured"] = detail::joint_summary(qpd);
    const long q_mean = std::lround(mean_current(c.params) * c.t);
    if (q_mean >= c.q_min && q_mean <= c.q_max)
        r.summary["weak"]["local_maxima_at_mean_q"] = local_maxima(weak.values.row(weak.row(q_mean)), 1e-8);
    const auto shift = measured_cumulant_shift(cumulants_analytic(c.params), c.detector, c.t);
    r.summary["work_variance"] = {{"unmeasured", scaled(cumulants_analytic(c.params), c.t).q(0, 2)},
                                  {"measured", scaled(shift, c.t).q(0, 2)}};
    if (full_path) {
        // P_gamma comes from the stationary Gaussian flow at each gamma node;
        // back-action broadens P_m(w), hence the wider grid
        const auto quad = gamma_quadrature(c.detector);
        const auto grid = UniformGrid::span(c.w_min - 150.0, c.w_max + 100.0, c.w_spacing);
        const auto pm = general_measured_w(c.params, c.detector, quad, c.t, grid, c.inversion());
        if (c.csv) out.write("measured_w_full.csv", [&](std::ostream& os) { write_csv(os, pm, "w", out.header()); });
        r.summary["full_w"] = detail::density_summary(pm);
        r.summary["full_w"]["gamma_nodes"] = quad.nodes.size();
        r.summary["full_w"]["gamma_width"] = c.detector.gamma_width();
    }
    if (c.json) out.write_json("measure.json", r.summary);
    r.files = out.files();
    return r;
}

// Figure datasets for one preset name (fig2a, fig2c, fig3, fig4).
inline RunResult run_figure(const RunConfig& c, const std::string& name) {
    OutputDir out(c, "figures " + name);
    const auto provider = make_provider(c);
    const auto opt = c.inversion();
    RunResult r;
    auto stub = [&](const std::string& csv, const std::string& kind) {
        out.write(csv.substr(0, csv.size() - 4) + ".plot", [&](std::ostream& os) { os << detail::plot_stub(csv, kind); });
    };
    if (name == "fig2a" || name == "fig2c") {
        const auto j = joint(*provider, c.t, c.q_min, c.q_max, c.w_grid(), opt);
        out.write(name + "_joint.csv", [&](std::ostream& os) { write_csv(os, j, out.header()); });
        stub(name + "_joint.csv", "joint");
        r.summary["joint"] = detail::joint_summary(j);
        InversionOptions mo = opt;
        mo.resolution = 0.0;
        const auto pq = marginal_q(*provider, c.t, c.q_min, c.q_max, mo);
        const auto rates = poisson_rates(c.params);
        out.write(name + "_q.csv", [&](std::ostream& os) {
            os << out.header() << "# " << meta_json(pq.meta).dump() << "\nq,value,poisson\n";
            os.precision(17);
            for (std::size_t i = 0; i < pq.q_values.size(); ++i)
                os << pq.q_values[i] << ',' << pq.mass[i] << ',' << bidirectional_poisson(pq.q_values[i], rates, c.t)
                   << '\n';
        });
        stub(name + "_q.csv", "bars");
        const auto pw = marginal_w(*provider, c.t, c.w_grid(), mo);
        const auto cum = scaled(cumulants_analytic(c.params), c.t);
        out.write(name + "_w.csv", [&](std::ostream& os) {
            detail::write_with_reference(os, out.header(), pw, "w", "gaussian",
                                         [&](double w) { return gaussian_work(w, cum.q(0, 1), cum.q(0, 2)); });
        });
        stub(name + "_w.csv", "pair");
        r.summary["w"] = detail::density_summary(pw);
    } else if (name == "fig3") {
        const auto d = delta_dist(*provider, c.t, c.delta_grid(), opt);
        const double mq = mean_current(c.params) * c.t;
        out.write("fig3_delta.csv", [&](std::ostream& os) {
            detail::write_with_reference(os, out.header(), d, "delta", "airy",
                                         [&](double x) { return airy_approx(x, mq); });
        });
        stub("fig3_delta.csv", "pair");
        r.summary["delta"] = detail::density_summary(d);
    } else if (name == "fig4") {
        const auto qpd = joint(*provider, c.t, c.q_min, c.q_max, c.w_grid(), opt);
        const auto m = weak_measured_joint(qpd, c.detector);
        out.write("fig4_measured.csv", [&](std::ostream& os) { write_csv(os, m, out.header()); });
        stub("fig4_measured.csv", "joint");
        r.summary["measured"] = detail::joint_summary(m);
    } else {
        throw config_error("unknown figure '" + name + "'");
    }
    if (c.json) out.write_json(name + ".json", r.summary);
    r.files = out.files();
    return r;
}

}  // namespace heatwork
