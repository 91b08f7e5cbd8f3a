#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "model.hpp"
#include "provider.hpp"

namespace heatwork {

enum class Provenance { analytic, finite_difference, oracle };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::analytic: return "analytic";
        case Provenance::finite_difference: return "finite-difference";
        case Provenance::oracle: return "oracle";
    }
    return "?";
}

struct CumulantEntry {
    cplx value{0.0};
    double uncertainty = 0.0;
    Provenance provenance = Provenance::analytic;
    double step = 0.0;  // base finite-difference step, 0 for formulas
    bool converged = true;
    std::string note;
};

// Cumulants per unit time. entries[(k, m)] is <<q^k w^m>>/t and
// delta_entries[k] is <<Delta^k>>/t with Delta = w - q.
struct CumulantTable {
    std::map<std::pair<int, int>, CumulantEntry> entries;
    std::map<int, CumulantEntry> delta_entries;
    std::map<std::string, double> annotations;
    std::string backend;

    double q(int k, int m = 0) const { return entries.at({k, m}).value.real(); }
    double delta(int k) const { return delta_entries.at(k).value.real(); }
};

inline CumulantTable scaled(CumulantTable t, double time) {
    for (auto& [key, e] : t.entries) {
        e.value *= time;
        e.uncertainty *= time;
    }
    for (auto& [key, e] : t.delta_entries) {
        e.value *= time;
        e.uncertainty *= time;
    }
    return t;
}

struct FdOptions {
    double base_step = 1e-2;
    int levels = 3;             // Richardson levels (steps h, h/2, h/4, ...)
    double flag_tolerance = 1e-6;  // relative extrapolation spread above which an entry is flagged
};

namespace detail {

// Stencil for the n-th central difference: offsets (in units of h) and weights.
inline std::vector<std::pair<double, double>> central_stencil(int n) {
    std::vector<std::pair<double, double>> st;
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
        st.emplace_back(0.5 * n - k, (k % 2 ? -1.0 : 1.0) * binom);
        binom = binom * (n - k) / (k + 1);
    }
    return st;
}

// Orders 4 and 5 use larger steps and one more Richardson level so that
// rounding error (eps/h^n) stays below the extrapolated truncation error.
inline double order_step(int n, double base) {
    if (n <= 3) return base;
    return n == 4 ? 8.0 * base : 7.5 * base;
}
inline int order_levels(int n, int levels) { return n <= 3 ? levels : levels + 1; }

inline cplx ipow(int n) {
    static const cplx powers[4] = {1.0, I1, -1.0, -I1};
    return powers[n % 4];
}

struct Extrapolated {
    cplx value;
    double spread;
};

inline Extrapolated richardson(const std::function<cplx(double)>& estimate, double h, int levels) {
    std::vector<std::vector<cplx>> R(levels);
    for (int i = 0; i < levels; ++i) {
        R[i].resize(i + 1);
        R[i][0] = estimate(h / std::pow(2.0, i));
        double f = 1.0;
        for (int j = 1; j <= i; ++j) {
            f *= 4.0;
            R[i][j] = R[i][j - 1] + (R[i][j - 1] - R[i - 1][j - 1]) / (f - 1.0);
        }
    }
    const auto& last = R[levels - 1];
    const double spread = levels > 1 ? std::abs(last[levels - 1] - last[levels - 2]) : INFINITY;
    return {last.back(), spread};
}

}  // namespace detail

inline CumulantTable cumulants_fd(const CgfProvider& provider, int max_order, const FdOptions& opt = {}) {
    if (max_order < 1 || max_order > 5) throw std::invalid_argument("cumulants_fd: max_order must be in 1..5");
    CumulantTable table;
    table.backend = provider.name();
    const Provenance prov = provider.name() == "fock" ? Provenance::oracle : Provenance::finite_difference;
    auto finish = [&](detail::Extrapolated ex, int n, double h) {
        CumulantEntry e;
        e.value = detail::ipow(n) * ex.value;
        e.uncertainty = ex.spread;
        e.provenance = prov;
        e.step = h;
        e.converged = ex.spread <= opt.flag_tolerance * std::max(1.0, std::abs(e.value));
        if (!e.converged) e.note = "Richardson spread above tolerance";
        return e;
    };
    std::map<std::pair<double, double>, cplx> cache;
    auto S = [&](double chi, double lambda) {
        auto [it, fresh] = cache.try_emplace({chi, lambda});
        if (fresh) it->second = provider.rate(chi, lambda);
        return it->second;
    };
    for (int n = 1; n <= max_order; ++n) {
        const double h = detail::order_step(n, opt.base_step);
        for (int k = n; k >= 0; --k) {
            const int m = n - k;
            const auto sk = detail::central_stencil(k), sm = detail::central_stencil(m);
            auto estimate = [&](double step) {
                cplx acc = 0.0;
                for (auto [xa, ca] : sk)
                    for (auto [yb, cb] : sm) acc += ca * cb * S(xa * step, yb * step);
                return acc / std::pow(step, n);
            };
            table.entries[{k, m}] = finish(detail::richardson(estimate, h, detail::order_levels(n, opt.levels)), n, h);
        }
        const auto sd = detail::central_stencil(n);
        auto estimate = [&](double step) {
            cplx acc = 0.0;
            for (auto [x, c] : sd) acc += c * S(-x * step, x * step);
            return acc / std::pow(step, n);
        };
        table.delta_entries[n] = finish(detail::richardson(estimate, h, detail::order_levels(n, opt.levels)), n, h);
    }
    return table;
}

inline double mean_current(const EngineParams& p) {
    const double d = 4.0 * p.g * p.g + p.kappa_prod();
    return 4.0 * p.g * p.g * p.kappa_prod() * (p.nb_h - p.nb_c) / (d * p.kappa_sum());
}

// Closed-form cumulant rates up to third order plus the Delta cumulants.
inline CumulantTable cumulants_analytic(const EngineParams& p) {
    require_valid(p);
    CumulantTable t;
    t.backend = "analytic";
    const double K = p.kappa_prod(), ks = p.kappa_sum(), g2 = p.g * p.g, D = 4.0 * g2 + K;
    const double X = (ks * ks + D) / (ks * D);
    const double c1 = mean_current(p);
    // c1 coth(A/2), with its finite limit (nb_h + nb_c + 2 nb_h nb_c) 4g^2 K/(D ks) at equilibrium
    const double noise = p.nb_h == p.nb_c
                             ? 4.0 * g2 * K / (D * ks) * (p.nb_h + p.nb_c + 2.0 * p.nb_h * p.nb_c)
                             : c1 / std::tanh(0.5 * (beta_omega(p.nb_c) - beta_omega(p.nb_h)));
    const double c2 = noise + 2.0 * c1 * c1 * X;
    const double c3 = c1 * (1.0 + 6.0 * c2 * X - 12.0 * c1 * c1 / D);
    auto put = [&](int k, int m, double v) { t.entries[{k, m}] = {v, 0.0, Provenance::analytic, 0.0, true, ""}; };
    put(1, 0, c1);
    put(0, 1, c1);
    put(2, 0, c2);
    put(1, 1, c2);
    put(0, 2, c2);
    put(3, 0, c3);
    put(2, 1, c3);
    put(1, 2, c3 - 0.5 * c1 * K / D);
    put(0, 3, c3 + c1 * (2.0 * g2 - K) / D);
    auto put_delta = [&](int k, double v, std::string note = "") {
        t.delta_entries[k] = {v, 0.0, Provenance::analytic, 0.0, true, std::move(note)};
    };
    put_delta(1, 0.0);
    put_delta(2, 0.0);
    put_delta(3, 0.5 * c1);
    const double printed = c1 * (6.0 * g2 - K) / (4.0 * g2 * K);
    const double variant = c1 * (6.0 * g2 - K) / D;
    put_delta(5, printed, "printed form with denominator 4 g^2 kappa_c kappa_h; dimensionally inconsistent");
    t.annotations["delta5_printed"] = printed;
    t.annotations["delta5_denominator_4g2_plus_K"] = variant;
    return t;
}

struct Delta5Check {
    double fd, printed, variant;
    bool matches_printed, matches_variant;
};

inline Delta5Check check_delta5(const CumulantTable& fd, const EngineParams& p, double rel_tol = 1e-4) {
    const CumulantTable a = cumulants_analytic(p);
    const double v = fd.delta(5), pr = a.annotations.at("delta5_printed"),
                 va = a.annotations.at("delta5_denominator_4g2_plus_K");
    auto close = [&](double x) { return std::abs(v - x) <= rel_tol * std::max(std::abs(x), 1e-300); };
    return {v, pr, va, close(pr), close(va)};
}

inline nlohmann::json to_json(const CumulantEntry& e) {
    return {{"re", e.value.real()},       {"im", e.value.imag()},          {"uncertainty", e.uncertainty},
            {"provenance", to_string(e.provenance)}, {"step", e.step}, {"converged", e.converged},
            {"note", e.note}};
}

inline nlohmann::json to_json(const CumulantTable& t) {
    nlohmann::json j;
    j["backend"] = t.backend;
    j["per_unit_time"] = true;
    for (const auto& [key, e] : t.entries) {
        auto ej = to_json(e);
        ej["k"] = key.first;
        ej["m"] = key.second;
        j["entries"].push_back(ej);
    }
    for (const auto& [k, e] : t.delta_entries) {
        auto ej = to_json(e);
        ej["k"] = k;
        j["delta_entries"].push_back(ej);
    }
    for (const auto& [k, v] : t.annotations) j["annotations"][k] = v;
    return j;
}

}  // namespace heatwork
