#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "cumulants.hpp"
#include "errors.hpp"
#include "inversion.hpp"
#include "provider.hpp"

namespace heatwork {

// Gaussian detector. sigma = sigma_x / s is the noise width in work units;
// the back-action variable gamma = s pi has width s sigma_p.
struct DetectorParams {
    double sigma = 0.35;
    double s = 1.0;
    bool pure = true;      // sigma_x sigma_p = 1/2
    double sigma_p = 0.0;  // momentum width when not pure

    double sigma_x() const { return sigma * s; }
    double momentum_width() const { return pure ? 0.5 / sigma_x() : sigma_p; }
    double gamma_width() const { return s * momentum_width(); }
    // A Gaussian Wigner function is a state only if sigma_x sigma_p >= 1/2.
    bool physical() const { return sigma_x() * momentum_width() >= 0.5 * (1.0 - 1e-12); }
};

inline void require_valid(const DetectorParams& d) {
    if (!(d.sigma > 0.0) || !(d.s > 0.0)) throw config_error("detector: sigma and s must be > 0");
    if (!d.pure && !(d.sigma_p > 0.0)) throw config_error("detector: sigma_p must be > 0 for a mixed detector");
}

// Convolves each q row with N(0, sigma^2) along w. A joint that already
// carries a resolution window eps is convolved with sqrt(sigma^2 - eps^2),
// so the result always has total width sigma.
inline JointQPD weak_measured_joint(const JointQPD& qpd, const DetectorParams& det) {
    require_valid(det);
    const double eps = qpd.meta.resolution;
    const double h = qpd.w_grid.spacing;
    if (h > det.sigma / 4.0)
        throw range_error("weak_measured_joint: w spacing " + std::to_string(h) + " does not resolve sigma = " +
                          std::to_string(det.sigma) + " (need spacing <= sigma/4)");
    if (eps > det.sigma)
        throw range_error("weak_measured_joint: input resolution exceeds the detector width");
    JointQPD out = qpd;
    out.meta.resolution = det.sigma;
    out.meta.convention += "; measured with Gaussian noise width " + std::to_string(det.sigma);
    const double width = std::sqrt(det.sigma * det.sigma - eps * eps);
    if (width < 1e-3 * h) return out;

    const long reach = static_cast<long>(std::ceil(9.0 * width / h));
    std::vector<double> kernel(2 * reach + 1);
    for (long k = -reach; k <= reach; ++k)
        kernel[k + reach] = h * std::exp(-0.5 * std::pow(k * h / width, 2)) / (std::sqrt(2.0 * std::numbers::pi) * width);
    const long n = static_cast<long>(qpd.w_grid.count);
    for (arma::uword r = 0; r < qpd.values.n_rows; ++r)
        for (long i = 0; i < n; ++i) {
            double acc = 0.0;
            for (long k = std::max(-reach, i - n + 1); k <= std::min(reach, i); ++k)
                acc += kernel[k + reach] * qpd.values(r, i - k);
            out.values(r, i) = acc;
        }
    return out;
}

// Weak-measurement cumulants: noise adds sigma^2 to the work variance only.
// Entries are per unit time, so the shift is sigma^2 / t.
inline CumulantTable measured_cumulant_shift(CumulantTable table, const DetectorParams& det, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("measured_cumulant_shift: t must be > 0");
    auto& e = table.entries.at({0, 2});
    e.value += det.sigma * det.sigma / t;
    e.note += e.note.empty() ? "includes detector noise" : "; includes detector noise";
    return table;
}

// Quadrature over the back-action variable gamma. P_gamma = P_{-gamma}
// (the flow equations are invariant under gamma -> -gamma, sigma_ch ->
// -sigma_ch), so only gamma >= 0 is sampled and the weights are doubled.
struct GammaQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;  // include the Gaussian density of gamma; sum to 1
};

namespace detail {

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

}  // namespace detail

// Composite 8-point Gauss-Legendre on [0, cut sd]. P_gamma varies on a fixed
// scale in gamma near 0, so panels are 0.02 wide up to 0.4, 0.1 wide up to
// 1.5, and nine equal panels beyond.
inline GammaQuadrature gamma_quadrature(const DetectorParams& det, double cut = 6.1, int order = 8) {
    require_valid(det);
    const double sd = det.gamma_width(), top = cut * sd;
    std::vector<double> edges{0.0};
    auto fill = [&](double upto, double width) {
        upto = std::min(upto, top);
        const double from = edges.back();
        if (upto <= from) return;
        const int n = std::max(1, static_cast<int>(std::ceil((upto - from) / width - 1e-9)));
        for (int k = 1; k <= n; ++k) edges.push_back(from + (upto - from) * k / n);
    };
    fill(0.4, 0.02);
    fill(1.5, 0.1);
    if (top > edges.back()) fill(top, (top - edges.back()) / 9.0);
    if (edges.size() < 5) {  // narrow detectors: at least four panels
        edges = {0.0};
        for (int k = 1; k <= 4; ++k) edges.push_back(top * k / 4.0);
    }
    std::vector<double> x, w;
    detail::gauss_legendre(order, x, w);
    GammaQuadrature q;
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        for (int i = 0; i < order; ++i) {
            const double g = 0.5 * (a + b) + 0.5 * (b - a) * x[i];
            const double dens = std::exp(-0.5 * g * g / (sd * sd)) / (std::sqrt(2.0 * std::numbers::pi) * sd);
            q.nodes.push_back(g);
            q.weights.push_back(2.0 * 0.5 * (b - a) * w[i] * dens);
            total += q.weights.back();
        }
    }
    for (double& v : q.weights) v /= total;  // removes the tail beyond the cut (~1e-9)
    return q;
}

// The detector-averaged characteristic function sum_i w_i exp(t S_{gamma_i}).
inline Characteristic measured_characteristic(const std::vector<std::shared_ptr<const CgfProvider>>& providers,
                                              const std::vector<double>& weights, double t, unsigned threads = 1) {
    if (providers.empty() || providers.size() != weights.size())
        throw std::invalid_argument("measured_characteristic: one weight per provider");
    Characteristic c;
    c.path = [providers, weights, t, threads](std::span<const cplx> chis, std::span<const cplx> lambdas) {
        std::vector<std::vector<cplx>> parts(providers.size());
        detail::parallel_rows(providers.size(), threads,
                              [&](std::size_t i) { parts[i] = providers[i]->path(chis, lambdas); });
        std::vector<cplx> out(chis.size(), 0.0);
        for (std::size_t i = 0; i < providers.size(); ++i)
            for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights[i] * std::exp(t * parts[i][k]);
        return out;
    };
    c.backend = "measured(" + providers.front()->name() + ")";
    c.params = providers.front()->params();
    return c;
}

inline std::vector<std::shared_ptr<const CgfProvider>> gamma_providers(const EngineParams& p,
                                                                       const GammaQuadrature& q) {
    std::vector<std::shared_ptr<const CgfProvider>> out;
    for (double g : q.nodes) {
        try {
            out.push_back(std::make_shared<FlowProvider>(p, g));
        } catch (const convergence_error& e) {
            throw convergence_error("gamma node " + std::to_string(g) + ": " + e.what());
        }
    }
    return out;
}

// Measured distribution with back-action: P_gamma mixed over the detector's
// gamma marginal, convolved with N(0, sigma^2) along w.
inline JointQPD general_measured_joint(const EngineParams& p, const DetectorParams& det, const GammaQuadrature& q,
                                       double t, long q_min, long q_max, const UniformGrid& w_grid,
                                       InversionOptions opt = {}) {
    require_valid(det);
    const auto providers = gamma_providers(p, q);
    const Characteristic ch = measured_characteristic(providers, q.weights, t, opt.threads);
    opt.resolution = det.sigma;
    JointQPD out = joint(ch, t, q_min, q_max, w_grid, opt);
    out.meta.convention += "; measured with back-action, noise width " + std::to_string(det.sigma);
    return out;
}

inline Density general_measured_w(const EngineParams& p, const DetectorParams& det, const GammaQuadrature& q, double t,
                                  const UniformGrid& w_grid, InversionOptions opt = {}) {
    require_valid(det);
    const auto providers = gamma_providers(p, q);
    const Characteristic ch = measured_characteristic(providers, q.weights, t, opt.threads);
    opt.resolution = det.sigma;
    Density out = marginal_w(ch, t, w_grid, opt);
    out.meta.convention += "; measured with back-action, noise width " + std::to_string(det.sigma);
    return out;
}

// Weak-measurement P_m(w): P(w) convolved with N(0, sigma^2).
inline Density weak_measured_w(const CgfProvider& provider, const DetectorParams& det, double t,
                               const UniformGrid& w_grid, InversionOptions opt = {}) {
    require_valid(det);
    opt.resolution = det.sigma;
    return marginal_w(provider, t, w_grid, opt);
}

// Number of strict local maxima of a row along w.
inline int local_maxima(const arma::rowvec& row, double floor = 0.0) {
    int n = 0;
    for (arma::uword i = 1; i + 1 < row.n_elem; ++i)
        if (row[i] > row[i - 1] && row[i] >= row[i + 1] && row[i] > floor) ++n;
    return n;
}

}  // namespace heatwork
