#pragma once

#include <charconv>
#include <functional>
#include <istream>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "inversion.hpp"
#include "measurement.hpp"
#include "model.hpp"

namespace heatwork {

// Everything a CLI run needs. Serialized as flat "key = value" lines.
struct RunConfig {
    std::string preset;
    EngineParams params;
    double t = 150.0;
    std::string backend = "analytic";  // analytic | ode | fock
    int n_max = 0;                     // fock cutoff, required for the fock backend

    long q_min = -10, q_max = 160;
    double w_min = -20.0, w_max = 150.0, w_spacing = 0.05;
    double delta_min = -200.0, delta_max = 60.0, delta_spacing = 0.01;
    double resolution = 0.05;
    std::size_t chi_points = 0;
    double window_cut = 40.0;
    double imag_threshold = 1e-8;
    double tol = 1e-10;  // ODE and fixed-point tolerance
    bool check_boundary = true;

    double cgf_chi_min = -1.0, cgf_chi_max = 1.0;
    double cgf_lambda_min = -1.0, cgf_lambda_max = 1.0;
    int cgf_points = 5;
    int cumulant_order = 3;

    DetectorParams detector;
    std::string out = "out";
    bool csv = true;
    bool json = true;
    unsigned threads = 1;

    UniformGrid w_grid() const { return UniformGrid::span(w_min, w_max, w_spacing); }
    UniformGrid delta_grid() const { return UniformGrid::span(delta_min, delta_max, delta_spacing); }
    InversionOptions inversion() const {
        InversionOptions o;
        o.resolution = resolution;
        o.chi_points = chi_points;
        o.window_cut = window_cut;
        o.imag_threshold = imag_threshold;
        o.threads = threads;
        o.check_boundary = check_boundary;
        return o;
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

template <class T>
T parse_number(const std::string& s) {
    T v{};
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw config_error("not a number: '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("not a boolean: '" + s + "'");
}

struct ConfigKey {
    const char* name;
    const char* doc;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define HEATWORK_NUM(key, field, type, doc)                                                     \
    ConfigKey {                                                                                  \
        key, doc, [](const RunConfig& c) { return format_value(c.field); },                      \
            [](RunConfig& c, const std::string& v) { c.field = parse_number<type>(v); }          \
    }
#define HEATWORK_BOOL(key, field, doc)                                                          \
    ConfigKey {                                                                                  \
        key, doc, [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); },   \
            [](RunConfig& c, const std::string& v) { c.field = parse_bool(v); }                  \
    }
#define HEATWORK_STR(key, field, doc)                                                           \
    ConfigKey {                                                                                  \
        key, doc, [](const RunConfig& c) { return c.field; },                                    \
            [](RunConfig& c, const std::string& v) { c.field = v; }                              \
    }

inline std::string format_value(double v) { return format_double(v); }
template <class I>
    requires std::is_integral_v<I>
std::string format_value(I v) {
    return std::to_string(v);
}

inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        HEATWORK_STR("preset", preset, "name of the preset this config started from (informational)"),
        HEATWORK_NUM("g", params.g, double, "resonator coupling"),
        HEATWORK_NUM("kappa_h", params.kappa_h, double, "hot bath coupling"),
        HEATWORK_NUM("kappa_c", params.kappa_c, double, "cold bath coupling"),
        HEATWORK_NUM("nb_h", params.nb_h, double, "hot bath occupation"),
        HEATWORK_NUM("nb_c", params.nb_c, double, "cold bath occupation"),
        HEATWORK_NUM("t", t, double, "time horizon"),
        HEATWORK_STR("backend", backend, "analytic | ode | fock"),
        HEATWORK_NUM("n_max", n_max, int, "Fock cutoff per mode"),
        HEATWORK_NUM("q_min", q_min, long, "lowest heat quantum"),
        HEATWORK_NUM("q_max", q_max, long, "highest heat quantum"),
        HEATWORK_NUM("w_min", w_min, double, "work grid start"),
        HEATWORK_NUM("w_max", w_max, double, "work grid end"),
        HEATWORK_NUM("w_spacing", w_spacing, double, "work grid spacing"),
        HEATWORK_NUM("delta_min", delta_min, double, "Delta grid start"),
        HEATWORK_NUM("delta_max", delta_max, double, "Delta grid end"),
        HEATWORK_NUM("delta_spacing", delta_spacing, double, "Delta grid spacing"),
        HEATWORK_NUM("resolution", resolution, double, "Gaussian lambda window width (0: none)"),
        HEATWORK_NUM("chi_points", chi_points, std::size_t, "chi transform length (0: automatic)"),
        HEATWORK_NUM("window_cut", window_cut, double, "lambda cutoff in units of the window exponent"),
        HEATWORK_NUM("imag_threshold", imag_threshold, double, "largest tolerated imaginary residue"),
        HEATWORK_NUM("tol", tol, double, "ODE / fixed-point tolerance"),
        HEATWORK_BOOL("check_boundary", check_boundary, "reject q ranges with mass in the edge rows"),
        HEATWORK_NUM("cgf_chi_min", cgf_chi_min, double, "cgf table chi start"),
        HEATWORK_NUM("cgf_chi_max", cgf_chi_max, double, "cgf table chi end"),
        HEATWORK_NUM("cgf_lambda_min", cgf_lambda_min, double, "cgf table lambda start"),
        HEATWORK_NUM("cgf_lambda_max", cgf_lambda_max, double, "cgf table lambda end"),
        HEATWORK_NUM("cgf_points", cgf_points, int, "cgf table points per axis"),
        HEATWORK_NUM("cumulant_order", cumulant_order, int, "highest cumulant order (1-5)"),
        HEATWORK_NUM("sigma", detector.sigma, double, "detector noise width in work units"),
        HEATWORK_NUM("detector_s", detector.s, double, "detector coupling s"),
        HEATWORK_BOOL("detector_pure", detector.pure, "enforce sigma_x sigma_p = 1/2"),
        HEATWORK_NUM("detector_sigma_p", detector.sigma_p, double, "detector momentum width when not pure"),
        HEATWORK_STR("out", out, "output directory"),
        HEATWORK_BOOL("csv", csv, "write CSV grids"),
        HEATWORK_BOOL("json", json, "write JSON reports"),
        HEATWORK_NUM("threads", threads, unsigned, "worker threads"),
    };
    return keys;
}

#undef HEATWORK_NUM
#undef HEATWORK_BOOL
#undef HEATWORK_STR

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace detail

inline void set_key(RunConfig& c, const std::string& key, const std::string& value) {
    for (const auto& k : detail::config_keys())
        if (key == k.name) {
            k.set(c, value);
            return;
        }
    throw config_error("unknown key '" + key + "'");
}

inline void validate(const RunConfig& c) {
    require_valid(c.params);
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw config_error(what);
    };
    need(c.t > 0.0, "t must be > 0");
    need(c.backend == "analytic" || c.backend == "ode" || c.backend == "fock", "backend must be analytic, ode or fock");
    need(c.backend != "fock" || c.n_max >= 1, "the fock backend needs n_max >= 1");
    need(c.q_min <= c.q_max, "q_min must not exceed q_max");
    need(c.w_spacing > 0.0 && c.w_max > c.w_min, "work grid needs spacing > 0 and w_min < w_max");
    need(c.delta_spacing > 0.0 && c.delta_max > c.delta_min, "Delta grid needs spacing > 0 and delta_min < delta_max");
    need(c.resolution >= 0.0, "resolution must be >= 0");
    need(c.window_cut > 0.0 && c.imag_threshold > 0.0 && c.tol > 0.0, "tolerances must be > 0");
    need(c.cgf_points >= 1 && c.cgf_chi_max >= c.cgf_chi_min && c.cgf_lambda_max >= c.cgf_lambda_min,
         "cgf table ranges must be ordered with at least one point");
    need(c.cumulant_order >= 1 && c.cumulant_order <= 5, "cumulant_order must be in 1..5");
    need(c.threads >= 1, "threads must be >= 1");
    require_valid(c.detector);
}

// Reads "key = value" lines into c; '#' starts a comment. Errors carry the
// source name and line number.
inline void read_config(std::istream& in, RunConfig& c, const std::string& source = "config") {
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(source + ":" + std::to_string(no) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        try {
            set_key(c, key, value);
        } catch (const config_error& e) {
            throw config_error(source + ":" + std::to_string(no) + ": key '" + key + "': " + e.what());
        }
    }
}

inline std::string to_config_string(const RunConfig& c) {
    std::ostringstream os;
    for (const auto& k : detail::config_keys()) os << k.name << " = " << k.get(c) << "  # " << k.doc << '\n';
    return os.str();
}

// Figure presets. fig2a/fig3/fig4 share nb_h = 1, nb_c = 0.1, g = kappa, and
// g t = kappa t = 150; fig2c has g t = 600, kappa t = 12000.
inline RunConfig preset(const std::string& name) {
    RunConfig c;
    c.preset = name;
    if (name == "fig2a" || name == "fig3") return c;
    if (name == "fig2c") {
        c.params.g = 0.05;
        c.t = 12000.0;
        c.q_min = -20;
        c.q_max = 140;
        c.w_min = -20.0;
        c.w_max = 130.0;
        // at this coupling the windowed joint carries zero-mass structure in
        // every q row, so the edge rows cannot be empty
        c.check_boundary = false;
        return c;
    }
    if (name == "fig4") {
        c.detector.sigma = 0.35;
        return c;
    }
    throw config_error("unknown preset '" + name + "' (fig2a, fig2c, fig3, fig4)");
}

inline bool operator==(const RunConfig& a, const RunConfig& b) { return to_config_string(a) == to_config_string(b); }

}  // namespace heatwork
