#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace heatwork {

using cplx = std::complex<double>;
inline constexpr cplx I1{0.0, 1.0};

// chi counts net photons moved hot -> cold (chi = chi_h - chi_c), lambda
// counts Cooper pairs, gamma is the detector back-action parameter.
struct CountingPoint {
    cplx chi{0.0};
    cplx lambda{0.0};
    double gamma = 0.0;
};

inline cplx psi(cplx chi, cplx lambda, const EngineParams& p) {
    if (std::abs(lambda - 2.0 * I1) < 1e-12 || std::abs(lambda + 2.0 * I1) < 1e-12)
        throw singular_input_error("psi: lambda at a pole (+-2i)");
    const cplx R = (1.0 - I1 * lambda / 2.0) / (1.0 + I1 * lambda / 2.0);
    return p.nb_h * (p.nb_c + 1.0) * (std::exp(-I1 * chi) * R - 1.0) +
           p.nb_c * (p.nb_h + 1.0) * (std::exp(I1 * chi) / R - 1.0);
}

inline cplx psi(const CountingPoint& pt, const EngineParams& p) { return psi(pt.chi, pt.lambda, p); }

// Closed-form long-time CGF S/t. The two nested square roots are followed by
// analytic continuation; the state below carries the current root values.
class AnalyticCgf {
public:
    struct Roots {
        cplx inner;
        cplx outer;
    };

    explicit AnalyticCgf(EngineParams p) : p_(p) {}

    const EngineParams& params() const { return p_; }

    Roots origin() const {
        return {4.0 * p_.g * p_.g + p_.kappa_prod(), cplx(p_.kappa_sum())};
    }

    cplx value(const Roots& r) const { return 0.5 * p_.kappa_sum() - 0.5 * r.outer; }

    // Continue the roots from (c0,l0) to (c1,l1) along a straight segment.
    Roots track(Roots r, cplx c0, cplx l0, cplx c1, cplx l1) const {
        cplx d1 = inner_arg(c0, l0);
        cplx d2 = outer_arg_at(l0, r.inner);
        segment(r, d1, d2, c0, l0, c1, l1, 0);
        return r;
    }

    Roots roots_at(cplx chi, cplx lambda) const { return track(origin(), 0.0, 0.0, chi, lambda); }

    cplx rate(const CountingPoint& pt) const {
        if (pt.gamma != 0.0)
            throw std::invalid_argument("analytic CGF is only defined at gamma = 0");
        return value(roots_at(pt.chi, pt.lambda));
    }
    cplx rate(cplx chi, cplx lambda) const { return value(roots_at(chi, lambda)); }

    // Rates along a polyline starting at the origin and visiting pts in order.
    std::vector<cplx> path(std::span<const cplx> chis, std::span<const cplx> lambdas) const {
        std::vector<cplx> out(chis.size());
        Roots r = origin();
        cplx c0 = 0.0, l0 = 0.0;
        for (std::size_t i = 0; i < chis.size(); ++i) {
            r = track(r, c0, l0, chis[i], lambdas[i]);
            out[i] = value(r);
            c0 = chis[i];
            l0 = lambdas[i];
        }
        return out;
    }

    // Limit of S/t as |lambda| -> infinity along real lambda.
    cplx plateau(double chi) const {
        const cplx psi_inf = p_.nb_h * (p_.nb_c + 1.0) * (-std::exp(-I1 * chi) - 1.0) +
                             p_.nb_c * (p_.nb_h + 1.0) * (-std::exp(I1 * chi) - 1.0);
        const double ks = p_.kappa_sum();
        return 0.5 * ks - 0.5 * std::sqrt(ks * ks - 4.0 * p_.kappa_prod() * psi_inf);
    }

private:
    static constexpr int max_depth = 48;
    static constexpr double max_step = 0.25;

    cplx inner_arg(cplx chi, cplx lambda) const {
        const cplx G = p_.g * p_.g * (4.0 + lambda * lambda);
        const double K = p_.kappa_prod();
        return (G + K) * (G + K) - 4.0 * G * K * psi(chi, lambda, p_);
    }
    cplx outer_arg_at(cplx lambda, cplx inner) const {
        const cplx G = p_.g * p_.g * (4.0 + lambda * lambda);
        return p_.kappa_h * p_.kappa_h + p_.kappa_c * p_.kappa_c - 2.0 * G + 2.0 * inner;
    }

    // Accept a step when the root argument turns by well under pi/2 and its
    // modulus changes moderately, so the sign choice in follow() is unambiguous.
    static bool small_turn(cplx a, cplx b) {
        if (a == 0.0 || b == 0.0) return false;
        return std::abs(b - a) <= 0.5 * std::abs(a);
    }

    static cplx follow(cplx prev, cplx d) {
        const cplx s = std::sqrt(d);
        return std::abs(s - prev) <= std::abs(s + prev) ? s : -s;
    }

    void segment(Roots& r, cplx& d1, cplx& d2, cplx c0, cplx l0, cplx c1, cplx l1, int depth) const {
        const cplx e1 = inner_arg(c1, l1);
        bool ok = std::abs(c1 - c0) <= max_step && std::abs(l1 - l0) <= max_step && small_turn(d1, e1);
        Roots next = r;
        cplx e2;
        if (ok) {
            next.inner = follow(r.inner, e1);
            e2 = outer_arg_at(l1, next.inner);
            ok = small_turn(d2, e2);
            if (ok) next.outer = follow(r.outer, e2);
        }
        if (ok) {
            r = next;
            d1 = e1;
            d2 = e2;
            return;
        }
        if (depth >= max_depth)
            throw branch_ambiguity_error("CGF branch tracking failed: path passes through a branch point");
        const cplx cm = 0.5 * (c0 + c1), lm = 0.5 * (l0 + l1);
        segment(r, d1, d2, c0, l0, cm, lm, depth + 1);
        segment(r, d1, d2, cm, lm, c1, l1, depth + 1);
    }

    EngineParams p_;
};

inline cplx cgf_rate(const CountingPoint& pt, const EngineParams& p) { return AnalyticCgf(p).rate(pt); }

enum class Regime { small_g, small_kappa };

inline cplx cgf_rate_limit(const CountingPoint& pt, const EngineParams& p, Regime regime) {
    const cplx ps = psi(pt, p);
    const double ks = p.kappa_sum();
    if (regime == Regime::small_g) return p.g * p.g * (4.0 + pt.lambda * pt.lambda) * ps / ks;
    return 0.5 * ks * (1.0 - std::sqrt(1.0 - 4.0 * p.kappa_prod() * ps / (ks * ks)));
}

// Which imaginary chi-shift is paired with lambda -> -lambda.
enum class ShiftConvention {
    printed,    // S(chi - iA, -lambda)
    opposite,   // S(chi + iA, -lambda)
    reflected,  // S(-chi - iA, -lambda)
};

inline double symmetry_defect(const CountingPoint& pt, const EngineParams& p,
                              ShiftConvention conv = ShiftConvention::printed) {
    const AnalyticCgf cgf(p);
    const double A = affinity(p);
    cplx chi2;
    switch (conv) {
        case ShiftConvention::printed: chi2 = pt.chi - I1 * A; break;
        case ShiftConvention::opposite: chi2 = pt.chi + I1 * A; break;
        case ShiftConvention::reflected: chi2 = -pt.chi - I1 * A; break;
    }
    return std::abs(cgf.rate(pt.chi, pt.lambda) - cgf.rate(chi2, -pt.lambda));
}

}  // namespace heatwork
