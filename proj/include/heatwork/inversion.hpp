#pragma once

#include <armadillo>
#include <cstdio>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "provider.hpp"

namespace heatwork {

struct UniformGrid {
    double start = 0.0;
    double spacing = 1.0;
    std::size_t count = 0;

    static UniformGrid centered(double center, double spacing, std::size_t count) {
        return {center - 0.5 * spacing * static_cast<double>(count - 1), spacing, count};
    }
    // Points lo, lo + spacing, ... up to hi (inclusive within rounding).
    static UniformGrid span(double lo, double hi, double spacing) {
        return {lo, spacing, static_cast<std::size_t>(std::floor((hi - lo) / spacing + 1e-9)) + 1};
    }
    double at(std::size_t i) const { return start + spacing * static_cast<double>(i); }
    double back() const { return at(count - 1); }
    double center() const { return 0.5 * (start + back()); }
};

struct InversionOptions {
    double resolution = 0.0;        // width of the Gaussian lambda window; output is P convolved with N(0, resolution^2)
    std::size_t chi_points = 0;     // 0: power of two >= 8 (q_max - q_min) and >= twice the q support
    double imag_threshold = 1e-8;
    double window_cut = 40.0;       // lambda nodes with resolution^2 lambda^2 / 2 above this are skipped
    double tail_tolerance = 1e-13;  // unwindowed integrand at the lambda cutoff, relative to its peak
    double support_sigmas = 12.0;
    double period_factor = 2.0;
    double atom_floor = 1e-12;      // tail atoms below this are not reported
    double atom_error = 1e-6;       // without a window, atoms above this make the inversion invalid
    double boundary_mass = 1e-8;
    bool check_boundary = true;     // off for deliberate windows into the q range
    unsigned threads = 1;
};

struct InversionMeta {
    std::string backend;
    EngineParams params;
    double t = 0.0;
    double gamma = 0.0;
    double resolution = 0.0;
    std::size_t chi_points = 0;
    std::size_t lambda_points = 0;
    double lambda_step = 0.0;
    double lambda_max = 0.0;
    std::string convention;
};

// P(q, w): rows are q values (probability mass in q), columns the w grid
// (density in w).
struct JointQPD {
    std::vector<long> q_values;
    UniformGrid w_grid;
    arma::mat values;
    double imag_residue = 0.0;
    std::vector<double> tail_atom;  // weight per q at w = 0; empty when below the reporting floor
    InversionMeta meta;

    std::size_t row(long q) const {
        if (q < q_values.front() || q > q_values.back()) throw std::out_of_range("JointQPD: q outside range");
        return static_cast<std::size_t>(q - q_values.front());
    }
};

struct QDistribution {
    std::vector<long> q_values;
    std::vector<double> mass;
    double imag_residue = 0.0;
    InversionMeta meta;

    double at(long q) const {
        if (q < q_values.front() || q > q_values.back()) return 0.0;
        return mass[static_cast<std::size_t>(q - q_values.front())];
    }
};

// Density on a uniform grid. For P(Delta) the grid is the Delta grid and the
// atoms sit at Delta = -q with weights atom_weights[q - atom_q0].
struct Density {
    UniformGrid grid;
    std::vector<double> values;
    double imag_residue = 0.0;
    std::optional<double> tail_atom;
    long atom_q0 = 0;
    std::vector<double> atom_weights;
    InversionMeta meta;
};
using DeltaDistribution = Density;

// exp(S) along a sequence of points continued from the origin.
using CharacteristicPath = std::function<std::vector<cplx>(std::span<const cplx>, std::span<const cplx>)>;
// |lambda| -> infinity limit of exp(S) at real chi, when known.
using CharacteristicPlateau = std::function<std::optional<cplx>(double)>;

struct Characteristic {
    CharacteristicPath path;
    CharacteristicPlateau plateau;
    std::string backend;
    EngineParams params;
    double gamma = 0.0;
};

inline Characteristic characteristic(const CgfProvider& p, double t) {
    Characteristic c;
    c.path = [&p, t](std::span<const cplx> chis, std::span<const cplx> lambdas) {
        std::vector<cplx> v = p.path(chis, lambdas);
        for (auto& x : v) x = std::exp(t * x);
        return v;
    };
    c.plateau = [&p, t](double chi) -> std::optional<cplx> {
        if (auto s = p.plateau(chi)) return std::exp(t * *s);
        return std::nullopt;
    };
    c.backend = p.name();
    c.params = p.params();
    c.gamma = p.gamma();
    return c;
}

namespace detail {

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::size_t next_pow2(double x) {
    std::size_t n = 1;
    while (static_cast<double>(n) < x) n <<= 1;
    return n;
}

template <class F>
void parallel_rows(std::size_t n, unsigned threads, F&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t j = 0; j < n; ++j) body(j);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned k = 0; k < threads; ++k)
        pool.emplace_back([&, k] {
            try {
                for (std::size_t j = k; j < n; j += threads) body(j);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Mean and variance of the variable conjugate to lambda on the line
// (chi0 + slope lambda, lambda), from the curvature of ln Lambda at 0.
struct Moments {
    double mean, variance;
};

inline Moments line_moments(const Characteristic& ch, cplx slope_chi, cplx slope_lambda) {
    const double h = 1e-3;
    const cplx c[2] = {-h * slope_chi, h * slope_chi}, l[2] = {-h * slope_lambda, h * slope_lambda};
    const cplx lm = std::log(ch.path(std::span(&c[0], 1), std::span(&l[0], 1))[0]);
    const cplx lp = std::log(ch.path(std::span(&c[1], 1), std::span(&l[1], 1))[0]);
    // ln Lambda = -i mean x - variance x^2 / 2
    const double mean = (I1 * (lp - lm) / (2.0 * h)).real();
    const double var = -(lp + lm).real() / (h * h);
    return {mean, std::max(var, 0.0)};
}

struct LambdaPlan {
    double dw;             // internal w step
    std::size_t ratio;     // output spacing / dw
    std::size_t L;         // transform length
    double dlambda;
    std::size_t half;      // nodes evaluated on each side of 0 (excluding 0)
};

inline LambdaPlan plan_lambda(const UniformGrid& out, double lo, double hi, const InversionOptions& opt) {
    LambdaPlan pl{};
    double dw_max = out.spacing;
    if (opt.resolution > 0.0)
        dw_max = std::min(dw_max, std::numbers::pi * opt.resolution / std::sqrt(2.0 * opt.window_cut));
    pl.ratio = static_cast<std::size_t>(std::ceil(out.spacing / dw_max - 1e-12));
    pl.dw = out.spacing / static_cast<double>(pl.ratio);
    const double span = std::max(hi, out.back()) - std::min(lo, out.start);
    pl.L = next_pow2(opt.period_factor * span / pl.dw);
    pl.dlambda = 2.0 * std::numbers::pi / (static_cast<double>(pl.L) * pl.dw);
    std::size_t half = pl.L / 2 - 1;
    if (opt.resolution > 0.0) {
        const double lam_eval = std::sqrt(2.0 * opt.window_cut) / opt.resolution;
        half = std::min<std::size_t>(half, static_cast<std::size_t>(std::ceil(lam_eval / pl.dlambda)));
    }
    pl.half = half;
    return pl;
}

// f(w_i) = int dlambda/2pi e^{i lambda w_i} Lambda(chi0 + s lambda, lambda) W(lambda)
// on the output grid. Returns the values plus Lambda at the two ends of the
// evaluated lambda range.
struct LambdaRow {
    std::vector<cplx> values;
    cplx end_plus, end_minus;
    double peak;
};

inline LambdaRow invert_lambda(const Characteristic& ch, cplx chi0, cplx slope, const UniformGrid& out,
                               const LambdaPlan& pl, const InversionOptions& opt) {
    const std::size_t n = pl.half + 1;
    std::vector<cplx> chis(n), lams(n);
    arma::cx_vec x(pl.L, arma::fill::zeros);
    LambdaRow row;
    row.peak = 0.0;
    for (int side : {+1, -1}) {
        for (std::size_t k = 0; k < n; ++k) {
            const double lam = side * static_cast<double>(k) * pl.dlambda;
            lams[k] = lam;
            chis[k] = chi0 + slope * lam;
        }
        const std::vector<cplx> v = ch.path(chis, lams);
        for (std::size_t k = (side > 0 ? 0 : 1); k < n; ++k) {
            const double lam = lams[k].real();
            const double win = opt.resolution > 0.0 ? std::exp(-0.5 * opt.resolution * opt.resolution * lam * lam) : 1.0;
            const std::size_t idx = side > 0 ? k : pl.L - k;
            x[idx] = v[k] * win * std::exp(I1 * lam * out.start) * (pl.dlambda / (2.0 * std::numbers::pi));
            row.peak = std::max(row.peak, std::abs(v[k]));
        }
        (side > 0 ? row.end_plus : row.end_minus) = v[n - 1];
    }
    const arma::cx_vec f = arma::ifft(x) * static_cast<double>(pl.L);
    row.values.resize(out.count);
    for (std::size_t i = 0; i < out.count; ++i) row.values[i] = f[i * pl.ratio];
    return row;
}

inline void check_truncation(const LambdaRow& row, const InversionOptions& opt, double lambda_max) {
    if (opt.resolution > 0.0) return;
    const double tail = std::max(std::abs(row.end_plus), std::abs(row.end_minus));
    if (tail > opt.tail_tolerance * std::max(row.peak, 1.0))
        throw range_error("lambda truncation at " + std::to_string(lambda_max) + " leaves integrand " +
                          std::to_string(tail) + "; use a finer w spacing or a resolution window");
}

inline InversionMeta make_meta(const Characteristic& ch, double t, const InversionOptions& opt) {
    InversionMeta m;
    m.backend = ch.backend;
    m.params = ch.params;
    m.t = t;
    m.gamma = ch.gamma;
    m.resolution = opt.resolution;
    return m;
}

// Transform length over chi: covers the requested q range and the estimated
// support of P(q), so a narrow output window does not alias.
inline std::size_t chi_points(const Characteristic& ch, long q_min, long q_max, const InversionOptions& opt) {
    if (opt.chi_points) return opt.chi_points;
    const Moments m = line_moments(ch, 1.0, 0.0);
    const double support = 2.0 * opt.support_sigmas * std::sqrt(m.variance) + std::abs(m.mean);
    return next_pow2(std::max(8.0 * static_cast<double>(std::max(q_max - q_min, 1L)), 2.0 * support));
}

}  // namespace detail

inline QDistribution marginal_q(const Characteristic& ch, double t, long q_min, long q_max,
                                const InversionOptions& opt = {}) {
    if (!(t > 0.0) || q_max < q_min) throw std::invalid_argument("marginal_q: need t > 0 and q_min <= q_max");
    const std::size_t N = detail::chi_points(ch, q_min, q_max, opt);
    std::vector<cplx> chis(N), lams(N, 0.0);
    for (std::size_t j = 0; j < N; ++j) chis[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / N;
    const arma::cx_vec v(ch.path(chis, lams));
    const arma::cx_vec P = arma::ifft(v);
    QDistribution out;
    out.meta = detail::make_meta(ch, t, opt);
    out.meta.chi_points = N;
    out.meta.convention = "P(q): probability mass per integer q";
    for (long q = q_min; q <= q_max; ++q) {
        const cplx pq = P[static_cast<std::size_t>(((q % static_cast<long>(N)) + static_cast<long>(N)) % N)];
        out.q_values.push_back(q);
        out.mass.push_back(pq.real());
        out.imag_residue = std::max(out.imag_residue, std::abs(pq.imag()));
    }
    if (out.imag_residue > opt.imag_threshold)
        throw numeric_error("marginal_q: imaginary residue " + std::to_string(out.imag_residue));
    if (opt.check_boundary &&
        (std::abs(out.mass.front()) > opt.boundary_mass || std::abs(out.mass.back()) > opt.boundary_mass))
        throw range_error("marginal_q: mass at range boundary exceeds " + detail::format_number(opt.boundary_mass) +
                          "; widen the q range");
    return out;
}

inline QDistribution marginal_q(const CgfProvider& p, double t, long q_min, long q_max,
                                const InversionOptions& opt = {}) {
    return marginal_q(characteristic(p, t), t, q_min, q_max, opt);
}

namespace detail {

inline std::pair<double, double> w_support(const Characteristic& ch, const InversionOptions& opt) {
    const Moments m = line_moments(ch, 0.0, 1.0);
    const double sd = std::sqrt(m.variance);
    return {std::min(0.0, m.mean - opt.support_sigmas * sd), std::max(0.0, m.mean + opt.support_sigmas * sd)};
}

}  // namespace detail

inline Density marginal_w(const Characteristic& ch, double t, const UniformGrid& w_grid,
                          const InversionOptions& opt = {}) {
    if (!(t > 0.0) || w_grid.count < 2) throw std::invalid_argument("marginal_w: need t > 0 and a grid");
    const auto [lo, hi] = detail::w_support(ch, opt);
    const auto pl = detail::plan_lambda(w_grid, lo, hi, opt);
    const auto row = detail::invert_lambda(ch, 0.0, 0.0, w_grid, pl, opt);
    Density d;
    d.grid = w_grid;
    d.meta = detail::make_meta(ch, t, opt);
    d.meta.lambda_points = 2 * pl.half + 1;
    d.meta.lambda_step = pl.dlambda;
    d.meta.lambda_max = pl.half * pl.dlambda;
    d.meta.convention = "P(w): probability density in w";
    const std::optional<cplx> plat = ch.plateau ? ch.plateau(0.0) : std::nullopt;
    const double atom = plat ? std::abs(*plat) : 0.5 * std::abs(row.end_plus + row.end_minus);
    if (atom > opt.atom_floor) d.tail_atom = atom;
    if (opt.resolution == 0.0 && atom > opt.atom_error)
        throw long_time_error("marginal_w: plateau weight " + std::to_string(atom) +
                              " too large for clean inversion; t too small or use a resolution window");
    detail::check_truncation(row, opt, d.meta.lambda_max);
    for (const cplx v : row.values) {
        d.values.push_back(v.real());
        d.imag_residue = std::max(d.imag_residue, std::abs(v.imag()));
    }
    if (d.imag_residue > opt.imag_threshold)
        throw numeric_error("marginal_w: imaginary residue " + std::to_string(d.imag_residue));
    return d;
}

inline Density marginal_w(const CgfProvider& p, double t, const UniformGrid& w_grid, const InversionOptions& opt = {}) {
    return marginal_w(characteristic(p, t), t, w_grid, opt);
}

inline JointQPD joint(const Characteristic& ch, double t, long q_min, long q_max, const UniformGrid& w_grid,
                      const InversionOptions& opt = {}) {
    if (!(t > 0.0) || q_max < q_min || w_grid.count < 2)
        throw std::invalid_argument("joint: need t > 0, q_min <= q_max and a w grid");
    const std::size_t N = detail::chi_points(ch, q_min, q_max, opt);
    const auto [lo, hi] = detail::w_support(ch, opt);
    const auto pl = detail::plan_lambda(w_grid, lo, hi, opt);

    arma::cx_mat F(N, w_grid.count);
    arma::cx_vec atoms_chi(N);
    std::vector<double> tails(N, 0.0);
    detail::parallel_rows(N, opt.threads, [&](std::size_t j) {
        const double chi = 2.0 * std::numbers::pi * static_cast<double>(j) / N;
        const auto row = detail::invert_lambda(ch, chi, 0.0, w_grid, pl, opt);
        for (std::size_t i = 0; i < w_grid.count; ++i) F(j, i) = row.values[i];
        const std::optional<cplx> plat = ch.plateau ? ch.plateau(chi) : std::nullopt;
        atoms_chi[j] = plat ? *plat : 0.5 * (row.end_plus + row.end_minus);
        tails[j] = opt.resolution > 0.0 ? 0.0 : std::max(std::abs(row.end_plus), std::abs(row.end_minus)) /
                                                    std::max(row.peak, 1.0);
    });

    JointQPD out;
    out.w_grid = w_grid;
    out.meta = detail::make_meta(ch, t, opt);
    out.meta.chi_points = N;
    out.meta.lambda_points = 2 * pl.half + 1;
    out.meta.lambda_step = pl.dlambda;
    out.meta.lambda_max = pl.half * pl.dlambda;
    out.meta.convention = "P(q,w): probability mass in integer q, density in w";

    const arma::cx_mat P = arma::ifft(F);  // column-wise over chi
    const arma::cx_vec atoms = arma::ifft(atoms_chi);
    out.values.set_size(static_cast<arma::uword>(q_max - q_min + 1), w_grid.count);
    double atom_max = 0.0;
    std::vector<double> atom_q;
    for (long q = q_min; q <= q_max; ++q) {
        const std::size_t j = static_cast<std::size_t>(((q % static_cast<long>(N)) + static_cast<long>(N)) % N);
        const std::size_t r = static_cast<std::size_t>(q - q_min);
        out.q_values.push_back(q);
        for (std::size_t i = 0; i < w_grid.count; ++i) {
            out.values(r, i) = P(j, i).real();
            out.imag_residue = std::max(out.imag_residue, std::abs(P(j, i).imag()));
        }
        atom_q.push_back(atoms[j].real());
        atom_max = std::max(atom_max, std::abs(atoms[j]));
    }
    if (atom_max > opt.atom_floor) out.tail_atom = atom_q;
    if (opt.resolution == 0.0 && atom_max > opt.atom_error)
        throw long_time_error("joint: plateau atoms of weight " + std::to_string(atom_max) +
                              " at w = 0; invert with a resolution window");
    if (opt.resolution == 0.0 && *std::max_element(tails.begin(), tails.end()) > opt.tail_tolerance)
        throw range_error("joint: lambda truncation tail too large; use a finer w spacing or a resolution window");
    if (out.imag_residue > opt.imag_threshold)
        throw numeric_error("joint: imaginary residue " + std::to_string(out.imag_residue));
    auto row_mass = [&](std::size_t r) { return arma::accu(arma::abs(out.values.row(r))) * w_grid.spacing; };
    if (opt.check_boundary &&
        (row_mass(0) > opt.boundary_mass || row_mass(out.values.n_rows - 1) > opt.boundary_mass))
        throw range_error("joint: mass at q range boundary exceeds " + detail::format_number(opt.boundary_mass));
    return out;
}

inline JointQPD joint(const CgfProvider& p, double t, long q_min, long q_max, const UniformGrid& w_grid,
                      const InversionOptions& opt = {}) {
    return joint(characteristic(p, t), t, q_min, q_max, w_grid, opt);
}

inline DeltaDistribution delta_dist(const Characteristic& ch, double t, const UniformGrid& delta_grid,
                                    const InversionOptions& opt = {}) {
    if (!(t > 0.0) || delta_grid.count < 2) throw std::invalid_argument("delta_dist: need t > 0 and a grid");
    // plateau atoms sit at Delta = -q over the support of P(q)
    const detail::Moments mq = detail::line_moments(ch, 1.0, 0.0);
    const double sdq = std::sqrt(mq.variance);
    const double span_q = opt.support_sigmas * sdq;
    const double lo = std::min(-(mq.mean + span_q), -30.0), hi = std::max(-(mq.mean - span_q), 30.0);
    const auto pl = detail::plan_lambda(delta_grid, lo, hi, opt);
    const auto row = detail::invert_lambda(ch, 0.0, -1.0, delta_grid, pl, opt);
    DeltaDistribution d;
    d.grid = delta_grid;
    d.meta = detail::make_meta(ch, t, opt);
    d.meta.lambda_points = 2 * pl.half + 1;
    d.meta.lambda_step = pl.dlambda;
    d.meta.lambda_max = pl.half * pl.dlambda;
    d.meta.convention = "P(Delta): probability density in Delta = w - q";

    // atom weights a_q from the chi Fourier series of the plateau
    const long q0 = static_cast<long>(std::floor(mq.mean - span_q)), q1 = static_cast<long>(std::ceil(mq.mean + span_q));
    const std::size_t N = detail::next_pow2(8.0 * static_cast<double>(q1 - q0 + 1));
    arma::cx_vec plat(N);
    bool known = static_cast<bool>(ch.plateau);
    for (std::size_t j = 0; j < N && known; ++j) {
        const auto v = ch.plateau(2.0 * std::numbers::pi * static_cast<double>(j) / N);
        if (!v) known = false;
        else plat[j] = *v;
    }
    double atom_max = 0.0;
    if (known) {
        const arma::cx_vec a = arma::ifft(plat);
        d.atom_q0 = q0;
        for (long q = q0; q <= q1; ++q) {
            const cplx aq = a[static_cast<std::size_t>(((q % static_cast<long>(N)) + static_cast<long>(N)) % N)];
            d.atom_weights.push_back(aq.real());
            atom_max = std::max(atom_max, std::abs(aq));
        }
    } else {
        atom_max = std::max(std::abs(row.end_plus), std::abs(row.end_minus));
    }
    if (atom_max > opt.atom_floor) d.tail_atom = atom_max;
    else d.atom_weights.clear();
    if (opt.resolution == 0.0 && atom_max > opt.atom_error)
        throw long_time_error("delta_dist: plateau atoms of weight " + std::to_string(atom_max) +
                              "; invert with a resolution window");
    detail::check_truncation(row, opt, d.meta.lambda_max);
    for (const cplx v : row.values) {
        d.values.push_back(v.real());
        d.imag_residue = std::max(d.imag_residue, std::abs(v.imag()));
    }
    if (d.imag_residue > opt.imag_threshold)
        throw numeric_error("delta_dist: imaginary residue " + std::to_string(d.imag_residue));
    return d;
}

inline DeltaDistribution delta_dist(const CgfProvider& p, double t, const UniformGrid& delta_grid,
                                    const InversionOptions& opt = {}) {
    return delta_dist(characteristic(p, t), t, delta_grid, opt);
}

// Summaries over the stored grid (trapezoid-free Riemann sums: the grids are
// fine compared with every feature of the smoothed densities).
struct GridMoments {
    double mass, mean, variance, third;
};

inline GridMoments moments(const Density& d) {
    double m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        m0 += d.values[i];
        m1 += d.values[i] * d.grid.at(i);
    }
    m0 *= d.grid.spacing;
    m1 *= d.grid.spacing;
    const double mean = m1 / m0;
    double c2 = 0, c3 = 0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        const double x = d.grid.at(i) - mean;
        c2 += d.values[i] * x * x;
        c3 += d.values[i] * x * x * x;
    }
    return {m0, mean, c2 * d.grid.spacing / m0, c3 * d.grid.spacing / m0};
}

inline double total_mass(const JointQPD& j) { return arma::accu(j.values) * j.w_grid.spacing; }

inline Density sum_over_q(const JointQPD& j) {
    Density d;
    d.grid = j.w_grid;
    d.meta = j.meta;
    const arma::rowvec s = arma::sum(j.values, 0);
    d.values.assign(s.begin(), s.end());
    return d;
}

inline std::vector<double> integrate_over_w(const JointQPD& j) {
    const arma::vec s = arma::sum(j.values, 1) * j.w_grid.spacing;
    return {s.begin(), s.end()};
}

// Sum over q of int_{|w - q| > band} |P(q, w)| dw.
inline double off_diagonal_mass(const JointQPD& j, double band = 1.0) {
    double acc = 0.0;
    for (std::size_t r = 0; r < j.q_values.size(); ++r)
        for (std::size_t i = 0; i < j.w_grid.count; ++i)
            if (std::abs(j.w_grid.at(i) - static_cast<double>(j.q_values[r])) > band) acc += std::abs(j.values(r, i));
    return acc * j.w_grid.spacing;
}

inline nlohmann::json meta_json(const InversionMeta& m) {
    return {{"backend", m.backend},
            {"t", m.t},
            {"gamma", m.gamma},
            {"resolution", m.resolution},
            {"chi_points", m.chi_points},
            {"lambda_points", m.lambda_points},
            {"lambda_step", m.lambda_step},
            {"lambda_max", m.lambda_max},
            {"convention", m.convention},
            {"params",
             {{"g", m.params.g},
              {"kappa_h", m.params.kappa_h},
              {"kappa_c", m.params.kappa_c},
              {"nb_h", m.params.nb_h},
              {"nb_c", m.params.nb_c}}}};
}

// CSV with columns q,w,value (q slowest). Header lines start with '#'.
inline void write_csv(std::ostream& os, const JointQPD& j, const std::string& header = "") {
    os << header << "# " << meta_json(j.meta).dump() << "\n# imag_residue " << j.imag_residue << "\nq,w,value\n";
    os.precision(17);
    for (std::size_t r = 0; r < j.q_values.size(); ++r)
        for (std::size_t i = 0; i < j.w_grid.count; ++i)
            os << j.q_values[r] << ',' << j.w_grid.at(i) << ',' << j.values(r, i) << '\n';
}

inline void write_csv(std::ostream& os, const QDistribution& d, const std::string& header = "") {
    os << header << "# " << meta_json(d.meta).dump() << "\nq,value\n";
    os.precision(17);
    for (std::size_t i = 0; i < d.q_values.size(); ++i) os << d.q_values[i] << ',' << d.mass[i] << '\n';
}

inline void write_csv(std::ostream& os, const Density& d, const std::string& column, const std::string& header = "") {
    os << header << "# " << meta_json(d.meta).dump() << "\n" << column << ",value\n";
    os.precision(17);
    for (std::size_t i = 0; i < d.values.size(); ++i) os << d.grid.at(i) << ',' << d.values[i] << '\n';
}

inline nlohmann::json to_json(const JointQPD& j) {
    nlohmann::json out;
    out["meta"] = meta_json(j.meta);
    out["q_values"] = j.q_values;
    out["w_grid"] = {{"start", j.w_grid.start}, {"spacing", j.w_grid.spacing}, {"count", j.w_grid.count}};
    out["imag_residue"] = j.imag_residue;
    if (!j.tail_atom.empty()) out["tail_atom"] = j.tail_atom;
    nlohmann::json rows = nlohmann::json::array();
    for (arma::uword r = 0; r < j.values.n_rows; ++r) {
        const arma::rowvec v = j.values.row(r);
        rows.push_back(std::vector<double>(v.begin(), v.end()));
    }
    out["values"] = rows;
    return out;
}

inline nlohmann::json to_json(const Density& d) {
    nlohmann::json out;
    out["meta"] = meta_json(d.meta);
    out["grid"] = {{"start", d.grid.start}, {"spacing", d.grid.spacing}, {"count", d.grid.count}};
    out["imag_residue"] = d.imag_residue;
    if (d.tail_atom) out["tail_atom"] = *d.tail_atom;
    out["values"] = d.values;
    return out;
}

}  // namespace heatwork
