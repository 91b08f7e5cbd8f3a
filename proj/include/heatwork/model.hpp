#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace heatwork {

// Engine parameters. Rates are in units of an arbitrary inverse time; the
// occupations fix the bath temperatures. Frequencies are only used to report
// heat and work in energy units.
struct EngineParams {
    double g = 1.0;
    double kappa_h = 1.0;
    double kappa_c = 1.0;
    double nb_h = 1.0;
    double nb_c = 0.1;
    std::optional<double> omega_h;
    std::optional<double> omega_c;

    double kappa_sum() const { return kappa_h + kappa_c; }
    double kappa_prod() const { return kappa_h * kappa_c; }
    // Cooper-pair energy 2eV; zero when frequencies are not given.
    double pair_energy() const {
        return (omega_h && omega_c) ? *omega_h - *omega_c : 0.0;
    }
};

struct Diagnostic {
    std::string field;
    std::string message;
};

struct DiagnosticsReport {
    std::vector<Diagnostic> errors;
    std::vector<Diagnostic> warnings;

    bool ok() const { return errors.empty(); }
    bool empty() const { return errors.empty() && warnings.empty(); }
};

inline DiagnosticsReport validate(const EngineParams& p) {
    DiagnosticsReport r;
    auto positive = [&](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v))
            r.errors.push_back({name, "must be finite and > 0"});
    };
    auto nonneg = [&](const char* name, double v) {
        if (!(v >= 0.0) || !std::isfinite(v))
            r.errors.push_back({name, "must be finite and >= 0"});
    };
    positive("g", p.g);
    positive("kappa_h", p.kappa_h);
    positive("kappa_c", p.kappa_c);
    nonneg("nb_h", p.nb_h);
    nonneg("nb_c", p.nb_c);

    if (p.omega_h.has_value() != p.omega_c.has_value()) {
        r.errors.push_back({p.omega_h ? "omega_c" : "omega_h",
                            "frequencies must be given in pairs"});
    } else if (p.omega_h) {
        const double wh = *p.omega_h, wc = *p.omega_c;
        if (!(wc > 0.0)) r.errors.push_back({"omega_c", "must be > 0"});
        if (!(wh > wc)) r.errors.push_back({"omega_h", "must exceed omega_c"});
        if (wc > 0.0) {
            const double wmin = std::min(wh, wc);
            const double rate = std::max({p.g, p.kappa_h, p.kappa_c});
            if (rate / wmin > 0.1)
                r.warnings.push_back(
                    {rate == p.g ? "g" : "kappa",
                     "weak-coupling regime g, kappa << omega not satisfied (ratio " +
                         std::to_string(rate / wmin) + " > 0.1)"});
        }
    }
    return r;
}

inline void require_valid(const EngineParams& p) {
    auto r = validate(p);
    if (!r.ok()) throw config_error("invalid engine parameter " + r.errors.front().field + ": " +
                                    r.errors.front().message);
}

// beta_alpha * Omega_alpha from the Bose-Einstein occupation.
inline double beta_omega(double nb) { return std::log1p(1.0 / nb); }

// A = beta_c Omega_c - beta_h Omega_h, the entropy produced per photon moved hot -> cold.
inline double affinity(const EngineParams& p) {
    if (!(p.nb_h > 0.0) || !(p.nb_c > 0.0))
        throw std::domain_error(
            "affinity is infinite: a zero bath occupation means zero temperature, "
            "so beta*Omega diverges");
    return beta_omega(p.nb_c) - beta_omega(p.nb_h);
}

}  // namespace heatwork
