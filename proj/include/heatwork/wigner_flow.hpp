#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "cgf_analytic.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "ode.hpp"

namespace heatwork {

// Gaussian-ansatz state: mode variances, cross-covariances and the
// accumulated log of the generating function.
struct GaussianWignerState {
    cplx sigma_c, sigma_h, s_ch, sigma_ch;
    cplx logS{0.0};
    double t = 0.0;
};

struct XiWeights {
    cplx xi_plus_h, xi_minus_h, xi_plus_c, xi_minus_c;
};

inline XiWeights xi_weights(const EngineParams& p, cplx chi_h, cplx chi_c = 0.0) {
    auto pm = [](double n, cplx chi, double sign) {
        return (n + 1.0) * (std::exp(I1 * chi) - 1.0) + sign * n * (std::exp(-I1 * chi) - 1.0);
    };
    return {pm(p.nb_h, chi_h, 1.0), pm(p.nb_h, chi_h, -1.0), pm(p.nb_c, chi_c, 1.0), pm(p.nb_c, chi_c, -1.0)};
}

// Counting point with separate photon fields for the two baths.
struct FieldPoint {
    cplx chi_h{0.0};
    cplx chi_c{0.0};
    cplx lambda{0.0};
    double gamma = 0.0;

    static FieldPoint from(const CountingPoint& pt) { return {pt.chi, 0.0, pt.lambda, pt.gamma}; }
};

namespace detail {

using Cov = std::array<cplx, 4>;  // sigma_c, sigma_h, s_ch, sigma_ch

struct FlowCoefficients {
    double g, kc, kh, nc, nh, kbar, gamma;
    cplx lam, ac, ah, mc, mh, c0;  // mc = kappa_c xi_-^c, c0 = constant part of A

    FlowCoefficients(const EngineParams& p, const FieldPoint& f) {
        const XiWeights xi = xi_weights(p, f.chi_h, f.chi_c);
        g = p.g;
        kc = p.kappa_c;
        kh = p.kappa_h;
        nc = p.nb_c;
        nh = p.nb_h;
        kbar = 0.5 * (kc + kh);
        gamma = f.gamma;
        lam = f.lambda;
        ac = kc * xi.xi_plus_c;
        ah = kh * xi.xi_plus_h;
        mc = kc * xi.xi_minus_c;
        mh = kh * xi.xi_minus_h;
        c0 = -0.5 * (mc + mh);
    }

    cplx A(const Cov& y) const { return ac * y[0] + ah * y[1] + c0; }

    cplx rate(const Cov& y) const { return A(y) - 2.0 * I1 * lam * g * y[2]; }

    Cov rhs(const Cov& y) const {
        const cplx sc = y[0], sh = y[1], s = y[2], x = y[3];
        const cplx a = A(y);
        const cplx il = I1 * lam * g;
        Cov d;
        d[0] = 2.0 * g * (s - gamma * x) + kc * (nc + 0.5 - sc) - 2.0 * il * sc * s + ac * (sc * sc + 0.25) -
               mc * sc + ah * (x * x + s * s);
        d[1] = -2.0 * g * (s - gamma * x) + kh * (nh + 0.5 - sh) - 2.0 * il * sh * s + ah * (sh * sh + 0.25) -
               mh * sh + ac * (x * x + s * s);
        d[2] = g * (sh - sc) - kbar * s - il * (sc * sh + s * s - x * x - 0.25) + s * a;
        d[3] = -gamma * g * (sh - sc) - kbar * x - 2.0 * il * x * s + x * a;
        return d;
    }

    std::array<Cov, 4> jacobian(const Cov& y) const {
        const cplx sc = y[0], sh = y[1], s = y[2], x = y[3];
        const cplx a = A(y);
        const cplx il = I1 * lam * g;
        std::array<Cov, 4> J;
        J[0] = {-kc - 2.0 * il * s + 2.0 * ac * sc - mc, 0.0, 2.0 * g - 2.0 * il * sc + 2.0 * ah * s,
                -2.0 * g * gamma + 2.0 * ah * x};
        J[1] = {0.0, -kh - 2.0 * il * s + 2.0 * ah * sh - mh, -2.0 * g - 2.0 * il * sh + 2.0 * ac * s,
                2.0 * g * gamma + 2.0 * ac * x};
        J[2] = {-g - il * sh + s * ac, g - il * sc + s * ah, -kbar - 2.0 * il * s + a, 2.0 * il * x};
        J[3] = {gamma * g + x * ac, -gamma * g + x * ah, -2.0 * il * x, -kbar - 2.0 * il * s + a};
        return J;
    }
};

// Solve J d = b for a 4x4 complex system by Gaussian elimination with
// partial pivoting. Returns false when the matrix is numerically singular.
inline bool solve4(std::array<Cov, 4> J, Cov b, Cov& d) {
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(J[r][c]) > std::abs(J[piv][c])) piv = r;
        if (std::abs(J[piv][c]) < 1e-300) return false;
        std::swap(J[c], J[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < 4; ++r) {
            const cplx f = J[r][c] / J[c][c];
            for (int k = c; k < 4; ++k) J[r][k] -= f * J[c][k];
            b[r] -= f * b[c];
        }
    }
    for (int r = 3; r >= 0; --r) {
        cplx acc = b[r];
        for (int k = r + 1; k < 4; ++k) acc -= J[r][k] * d[k];
        d[r] = acc / J[r][r];
    }
    return true;
}

inline double norm_inf(const Cov& v) {
    double m = 0;
    for (const auto& c : v) m = std::max(m, std::abs(c));
    return m;
}

// Newton iteration on the stationarity conditions. On success y holds the
// fixed point.
inline bool newton(const FlowCoefficients& fc, Cov& y, double tol = 1e-13, int max_iter = 40) {
    Cov z = y;
    for (int it = 0; it < max_iter; ++it) {
        const Cov F = fc.rhs(z);
        Cov b, d;
        for (int i = 0; i < 4; ++i) b[i] = -F[i];
        if (!solve4(fc.jacobian(z), b, d)) return false;
        for (int i = 0; i < 4; ++i) z[i] += d[i];
        if (!std::isfinite(norm_inf(z))) return false;
        if (norm_inf(d) <= tol * (1.0 + norm_inf(z))) {
            y = z;
            return true;
        }
    }
    return false;
}

}  // namespace detail

inline GaussianWignerState thermal_product_state(const EngineParams& p) {
    return {p.nb_c + 0.5, p.nb_h + 0.5, 0.0, 0.0, 0.0, 0.0};
}

inline double flow_residual(const EngineParams& p, const GaussianWignerState& s, const FieldPoint& f = {}) {
    return detail::norm_inf(detail::FlowCoefficients(p, f).rhs({s.sigma_c, s.sigma_h, s.s_ch, s.sigma_ch}));
}

// Zero-field steady state, reached by damped Newton continuation in g from
// the decoupled thermal solution.
inline GaussianWignerState steady_state(const EngineParams& p) {
    if (!(p.kappa_h > 0.0) || !(p.kappa_c > 0.0) || !(p.g >= 0.0))
        throw config_error("steady_state: need kappa_h, kappa_c > 0 and g >= 0");
    detail::Cov y{p.nb_c + 0.5, p.nb_h + 0.5, 0.0, 0.0};
    constexpr int stages = 8;
    for (int k = 1; k <= stages; ++k) {
        EngineParams q = p;
        q.g = p.g * k / stages;
        if (!detail::newton(detail::FlowCoefficients(q, {}), y))
            throw convergence_error("steady_state: Newton iteration failed at g=" + std::to_string(q.g));
    }
    GaussianWignerState s{y[0], y[1], y[2], y[3], 0.0, 0.0};
    const double res = flow_residual(p, s);
    if (res > 1e-12) throw convergence_error("steady_state: residual " + std::to_string(res) + " above 1e-12");
    return s;
}

inline GaussianWignerState evolve(const GaussianWignerState& s0, const EngineParams& p, const FieldPoint& f,
                                  double duration, double tol = 1e-10) {
    if (!(tol > 0.0) || duration < 0.0) throw std::invalid_argument("evolve: need tol > 0 and duration >= 0");
    const detail::FlowCoefficients fc(p, f);
    DormandPrince dp(
        [&](double, const CVec& y, CVec& dy) {
            const detail::Cov c{y[0], y[1], y[2], y[3]};
            const detail::Cov d = fc.rhs(c);
            for (int i = 0; i < 4; ++i) dy[i] = d[i];
            dy[4] = fc.rate(c);
        },
        tol, tol * 1e-3);
    CVec y{s0.sigma_c, s0.sigma_h, s0.s_ch, s0.sigma_ch, s0.logS};
    dp.integrate(y, s0.t, s0.t + duration);
    return {y[0], y[1], y[2], y[3], y[4], s0.t + duration};
}

inline GaussianWignerState evolve(const GaussianWignerState& s0, const EngineParams& p, const CountingPoint& pt,
                                  double duration, double tol = 1e-10) {
    return evolve(s0, p, FieldPoint::from(pt), duration, tol);
}

struct NumericRate {
    cplx rate;
    cplx rate_half;  // slope from the first half of the trajectory
    double defect;   // |rate - rate_half|
    double horizon;
};

namespace detail {

inline cplx lsq_slope(std::span<const double> t, std::span<const cplx> y) {
    double tm = 0;
    cplx ym = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= static_cast<double>(t.size());
    ym /= static_cast<double>(t.size());
    double stt = 0;
    cplx sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    return sty / stt;
}

}  // namespace detail

// Long-time slope of logS from the ODE trajectory started in the zero-field
// steady state.
inline NumericRate cgf_rate_numeric(const FieldPoint& f, const EngineParams& p, double horizon = 150.0,
                                    double tol = 1e-10) {
    if (!(horizon > 0.0)) throw std::invalid_argument("cgf_rate_numeric: horizon must be > 0");
    constexpr int samples = 400;
    const GaussianWignerState ss = steady_state(p);
    const detail::FlowCoefficients fc(p, f);
    DormandPrince dp(
        [&](double, const CVec& y, CVec& dy) {
            const detail::Cov c{y[0], y[1], y[2], y[3]};
            const detail::Cov d = fc.rhs(c);
            for (int i = 0; i < 4; ++i) dy[i] = d[i];
            dy[4] = fc.rate(c);
        },
        tol, tol * 1e-3);
    CVec y{ss.sigma_c, ss.sigma_h, ss.s_ch, ss.sigma_ch, 0.0};
    std::vector<double> ts(samples + 1);
    std::vector<cplx> ls(samples + 1);
    ts[0] = 0;
    ls[0] = 0;
    for (int i = 1; i <= samples; ++i) {
        ts[i] = horizon * i / samples;
        dp.integrate(y, ts[i - 1], ts[i]);
        ls[i] = y[4];
    }
    const int tail = samples / 10;
    auto slope = [&](int end) {
        return detail::lsq_slope(std::span(ts).subspan(end - tail, tail + 1),
                                 std::span<const cplx>(ls).subspan(end - tail, tail + 1));
    };
    NumericRate r{slope(samples), slope(samples / 2), 0.0, horizon};
    r.defect = std::abs(r.rate - r.rate_half);
    if (r.defect > 10.0 * tol * (1.0 + std::abs(r.rate)))
        throw convergence_error("cgf_rate_numeric: slope not converged (defect " + std::to_string(r.defect) +
                                "); increase the horizon");
    return r;
}

inline NumericRate cgf_rate_numeric(const CountingPoint& pt, const EngineParams& p, double horizon = 150.0,
                                    double tol = 1e-10) {
    return cgf_rate_numeric(FieldPoint::from(pt), p, horizon, tol);
}

// Long-time rate as the generator evaluated at the attracting fixed point of
// the covariance flow, followed from the zero-field steady state by Newton
// continuation. Agrees with the trajectory slope wherever both converge and is
// much cheaper on large grids; the only route for gamma != 0 grids.
class FixedPointCgf {
public:
    FixedPointCgf(EngineParams p, double gamma) : p_(p), gamma_(gamma) {
        const GaussianWignerState ss = steady_state(p);
        base_ = {ss.sigma_c, ss.sigma_h, ss.s_ch, ss.sigma_ch};
        constexpr int stages = 64;
        for (int k = 1; k <= stages; ++k) {
            const double gk = gamma * k / stages;
            if (!detail::newton(detail::FlowCoefficients(p_, {0.0, 0.0, 0.0, gk}), base_))
                throw convergence_error("fixed point: gamma continuation failed at gamma=" + std::to_string(gk));
        }
    }

    const EngineParams& params() const { return p_; }
    double gamma() const { return gamma_; }

    struct Tracked {
        detail::Cov y;
        cplx chi, lambda;
    };

    Tracked origin() const { return {base_, 0.0, 0.0}; }

    cplx value(const Tracked& t) const {
        return detail::FlowCoefficients(p_, {t.chi, 0.0, t.lambda, gamma_}).rate(t.y);
    }

    Tracked track(Tracked s, cplx chi, cplx lambda) const {
        segment(s, chi, lambda, 0);
        return s;
    }

    cplx rate(cplx chi, cplx lambda) const { return value(track(origin(), chi, lambda)); }

    std::vector<cplx> path(std::span<const cplx> chis, std::span<const cplx> lambdas) const {
        std::vector<cplx> out(chis.size());
        Tracked s = origin();
        for (std::size_t i = 0; i < chis.size(); ++i) {
            s = track(s, chis[i], lambdas[i]);
            out[i] = value(s);
        }
        return out;
    }

private:
    static constexpr int max_depth = 40;
    static constexpr double max_step = 0.1;

    void segment(Tracked& s, cplx chi, cplx lambda, int depth) const {
        const bool short_step = std::abs(chi - s.chi) <= max_step && std::abs(lambda - s.lambda) <= max_step;
        if (short_step) {
            detail::Cov y = s.y;
            const detail::FlowCoefficients fc(p_, {chi, 0.0, lambda, gamma_});
            if (detail::newton(fc, y) && detail::norm_inf(detail::Cov{y[0] - s.y[0], y[1] - s.y[1], y[2] - s.y[2],
                                                                      y[3] - s.y[3]}) <=
                                             0.5 * (1.0 + detail::norm_inf(s.y))) {
                s = {y, chi, lambda};
                return;
            }
        }
        if (depth >= max_depth)
            throw convergence_error("fixed point continuation failed near chi=" + std::to_string(chi.real()) +
                                    ", lambda=" + std::to_string(lambda.real()));
        const cplx cm = 0.5 * (s.chi + chi), lm = 0.5 * (s.lambda + lambda);
        segment(s, cm, lm, depth + 1);
        segment(s, chi, lambda, depth + 1);
    }

    EngineParams p_;
    double gamma_;
    detail::Cov base_;
};

}  // namespace heatwork
