#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "closed_forms.hpp"
#include "cumulants.hpp"
#include "inversion.hpp"
#include "provider.hpp"

namespace heatwork {

enum class Verdict { holds, violated, violated_as_predicted, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::violated: return "violated";
        case Verdict::violated_as_predicted: return "violated-as-predicted";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct LawReport {
    std::string law;
    std::string relation;
    std::map<std::string, double> margins;
    double tolerance = 0.0;
    Verdict verdict = Verdict::inconclusive;
    bool degenerate = false;  // e.g. 0-vs-0 at equilibrium, counted as a pass
    std::string note;
    EngineParams params;
    double t = 1.0;

    bool passed() const { return verdict == Verdict::holds || verdict == Verdict::violated_as_predicted; }
};

inline nlohmann::json to_json(const LawReport& r) {
    nlohmann::json j;
    j["law"] = r.law;
    j["relation"] = r.relation;
    j["margins"] = r.margins;
    j["tolerance"] = r.tolerance;
    j["verdict"] = to_string(r.verdict);
    j["degenerate"] = r.degenerate;
    if (!r.note.empty()) j["note"] = r.note;
    j["t"] = r.t;
    j["params"] = {{"g", r.params.g},
                   {"kappa_h", r.params.kappa_h},
                   {"kappa_c", r.params.kappa_c},
                   {"nb_h", r.params.nb_h},
                   {"nb_c", r.params.nb_c}};
    return j;
}

struct FirstLawOptions {
    double mean_tolerance = 1e-8;   // relative |<<q>> - <<w>>| / <<q>>
    double delta_tolerance = 1e-6;  // |<<Delta^k>>| per unit time counted as nonzero above this
    int max_order = 3;
};

// Report 1: <<w>> = <<q>>. Report 2: the lowest nonvanishing Delta cumulant,
// which the theory puts at k = 3 with <<Delta^3>> = <<q>>/2.
inline std::pair<LawReport, LawReport> first_law_report(const CgfProvider& provider, double t = 1.0,
                                                        const FirstLawOptions& opt = {}) {
    const CumulantTable c = cumulants_fd(provider, opt.max_order);
    const double q1 = c.q(1, 0), w1 = c.q(0, 1);
    LawReport mean;
    mean.law = "first-law-mean";
    mean.relation = "<<w>> = <<q>>";
    mean.params = provider.params();
    mean.t = t;
    mean.tolerance = opt.mean_tolerance;
    const double diff = std::abs(q1 - w1);
    if (std::abs(q1) < 1e-12) {
        mean.degenerate = true;
        mean.margins["absolute"] = diff * t;
        mean.verdict = diff < opt.mean_tolerance ? Verdict::holds : Verdict::violated;
        mean.note = "zero current; absolute difference used";
    } else {
        mean.margins["relative"] = diff / std::abs(q1);
        mean.verdict = diff / std::abs(q1) < opt.mean_tolerance ? Verdict::holds : Verdict::violated;
    }
    mean.margins["q"] = q1 * t;
    mean.margins["w"] = w1 * t;

    LawReport dist;
    dist.law = "first-law-distribution";
    dist.relation = "P(q,w) = P(q) delta(w - q), i.e. all <<Delta^k>> = 0";
    dist.params = provider.params();
    dist.t = t;
    dist.tolerance = opt.delta_tolerance;
    int first = 0;
    for (int k = 1; k <= opt.max_order; ++k) {
        dist.margins["delta" + std::to_string(k)] = c.delta(k) * t;
        if (!first && std::abs(c.delta(k)) > opt.delta_tolerance) first = k;
    }
    dist.margins["first_nonvanishing_order"] = first;
    if (opt.max_order >= 3 && std::abs(q1) > 1e-300) dist.margins["delta3_over_q"] = c.delta(3) / q1;
    if (first == 0)
        dist.verdict = Verdict::holds;
    else
        dist.verdict = first == 3 ? Verdict::violated_as_predicted : Verdict::violated;
    return {mean, dist};
}

inline std::pair<LawReport, LawReport> first_law_report(const EngineParams& p, double t = 1.0,
                                                        const FirstLawOptions& opt = {}) {
    return first_law_report(AnalyticProvider(p), t, opt);
}

struct FluctuationOptions {
    double floor = 1e-10;  // densities / masses below this are not compared
    double tolerance = 1e-4;
    double resolution = 0.05;
    double w_spacing = 0.05;
    double w_half_width = 30.0;
    bool joint = true;
};

// Largest relative defect of P(-q)/P(q) = e^{-qA} and, optionally, of
// P(-q,-w)/P(q,w) = e^{-qA} over q in [-q_max, q_max].
inline LawReport fluctuation_theorem_report(const CgfProvider& provider, double t, long q_max,
                                            const FluctuationOptions& opt = {}) {
    const EngineParams& p = provider.params();
    const double A = affinity(p);
    LawReport r;
    r.law = "fluctuation-theorem";
    r.relation = "P(-q,-w) / P(q,w) = exp(-q A)";
    r.params = p;
    r.t = t;
    r.tolerance = opt.tolerance;
    auto defect = [&](double a, double b, long q) { return std::abs(b / a / std::exp(-static_cast<double>(q) * A) - 1.0); };

    // the marginal range must hold the whole distribution for the boundary check
    const detail::Moments m = detail::line_moments(characteristic(provider, t), 1.0, 0.0);
    const double reach = std::abs(m.mean) + 14.0 * std::sqrt(m.variance) + 10.0;
    const long q_lo = std::min(-q_max, static_cast<long>(std::floor(-reach))),
               q_hi = std::max(q_max, static_cast<long>(std::ceil(reach)));
    const auto pq = marginal_q(provider, t, q_lo, q_hi);
    double worst_marginal = 0.0;
    int n_marginal = 0;
    for (long q = 1; q <= q_max; ++q) {
        if (pq.at(q) <= opt.floor || pq.at(-q) <= opt.floor) continue;
        worst_marginal = std::max(worst_marginal, defect(pq.at(q), pq.at(-q), q));
        ++n_marginal;
    }
    r.margins["marginal_defect"] = worst_marginal;
    r.margins["marginal_points"] = n_marginal;

    double worst_joint = 0.0;
    int n_joint = 0;
    if (opt.joint) {
        InversionOptions o;
        o.resolution = opt.resolution;
        o.check_boundary = false;
        const auto j = joint(provider, t, -q_max, q_max, UniformGrid::span(-opt.w_half_width, opt.w_half_width, opt.w_spacing), o);
        const std::size_t n = j.w_grid.count;
        for (long q = -q_max; q <= q_max; ++q)
            for (std::size_t i = 0; i < n; ++i) {
                const double a = j.values(j.row(q), i), b = j.values(j.row(-q), n - 1 - i);
                if (std::abs(a) <= opt.floor || std::abs(b) <= opt.floor) continue;
                worst_joint = std::max(worst_joint, defect(a, b, q));
                ++n_joint;
            }
        r.margins["joint_defect"] = worst_joint;
        r.margins["joint_points"] = n_joint;
    }
    if (n_marginal + n_joint == 0) {
        r.verdict = Verdict::inconclusive;
        r.note = "no points above the density floor";
        return r;
    }
    r.verdict = std::max(worst_marginal, worst_joint) < opt.tolerance ? Verdict::holds : Verdict::violated;
    return r;
}

inline LawReport fluctuation_theorem_report(const EngineParams& p, double t, long q_max,
                                            const FluctuationOptions& opt = {}) {
    return fluctuation_theorem_report(AnalyticProvider(p), t, q_max, opt);
}

// Fluctuation-theorem defect of the bidirectional Poisson law itself.
inline double poisson_ft_defect(const PoissonRates& r, double t, long q_max) {
    const double A = std::log(r.gamma_ch / r.gamma_hc);
    double worst = 0.0;
    for (long q = 1; q <= q_max; ++q) {
        const double ratio = std::exp(log_bidirectional_poisson(-q, r, t) - log_bidirectional_poisson(q, r, t));
        worst = std::max(worst, std::abs(ratio / std::exp(-static_cast<double>(q) * A) - 1.0));
    }
    return worst;
}

// TUR <<q^2>>/<<q>>^2 >= 2 / <<Sigma>> with <<Sigma>> = <<q>> A, and the mean
// second law <<q>> A >= 0. Cumulants are evaluated at time t.
inline std::pair<LawReport, LawReport> tur_and_second_law_report(const EngineParams& p, double t = 1.0,
                                                                 double tolerance = 1e-12) {
    const CumulantTable c = scaled(cumulants_analytic(p), t);
    const double q1 = c.q(1), q2 = c.q(2);
    const bool equilibrium = p.nb_h == p.nb_c;
    const double A = equilibrium ? 0.0 : affinity(p);

    LawReport tur;
    tur.law = "thermodynamic-uncertainty-relation";
    tur.relation = "<<q^2>>/<<q>>^2 >= 2/<<Sigma>>";
    tur.params = p;
    tur.t = t;
    tur.tolerance = tolerance;
    LawReport second;
    second.law = "second-law-mean";
    second.relation = "<<q>> A >= 0";
    second.params = p;
    second.t = t;
    second.tolerance = tolerance;
    second.margins["entropy_production"] = q1 * A;
    if (equilibrium || std::abs(q1) < 1e-300) {
        tur.degenerate = second.degenerate = true;
        tur.verdict = second.verdict = Verdict::holds;
        tur.margins["margin"] = 0.0;
        tur.note = second.note = "equilibrium: both sides vanish";
        return {tur, second};
    }
    const double lhs = q2 / (q1 * q1), rhs = 2.0 / (q1 * A);
    tur.margins["lhs"] = lhs;
    tur.margins["rhs"] = rhs;
    tur.margins["margin"] = lhs - rhs;
    tur.verdict = lhs - rhs >= -tolerance * rhs ? Verdict::holds : Verdict::violated;
    second.verdict = q1 * A >= -tolerance ? Verdict::holds : Verdict::violated;
    return {tur, second};
}

// 5 x 5 x 5 grid: g/kappa log-spaced on [0.05, 20], nb_h on (0, 2], and
// nb_c = f nb_h for f in (0, 1).
inline std::vector<EngineParams> tur_sweep_points() {
    std::vector<EngineParams> out;
    for (int i = 0; i < 5; ++i)
        for (double nb_h : {0.1, 0.5, 1.0, 1.5, 2.0})
            for (double f : {0.01, 0.25, 0.5, 0.75, 0.99}) {
                EngineParams p;
                p.g = 0.05 * std::pow(400.0, i / 4.0);
                p.nb_h = nb_h;
                p.nb_c = f * nb_h;
                out.push_back(p);
            }
    return out;
}

inline std::vector<LawReport> tur_sweep(unsigned threads = 1) {
    const auto pts = tur_sweep_points();
    std::vector<LawReport> out(pts.size());
    detail::parallel_rows(pts.size(), threads, [&](std::size_t i) { out[i] = tur_and_second_law_report(pts[i]).first; });
    return out;
}

}  // namespace heatwork
