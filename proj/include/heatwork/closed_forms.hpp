#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "model.hpp"
#include "special_functions.hpp"

namespace heatwork {

// Directed photon-transfer rates in the weak-coupling bottleneck limit.
struct PoissonRates {
    double gamma_ch = 0.0;  // hot to cold
    double gamma_hc = 0.0;  // cold to hot
};

inline PoissonRates poisson_rates(const EngineParams& p) {
    const double pre = 4.0 * p.g * p.g / p.kappa_sum();
    return {pre * p.nb_h * (p.nb_c + 1.0), pre * p.nb_c * (p.nb_h + 1.0)};
}

inline double log_bidirectional_poisson(long q, const PoissonRates& r, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("bidirectional_poisson: t must be > 0");
    if (r.gamma_ch < 0.0 || r.gamma_hc < 0.0) throw std::invalid_argument("bidirectional_poisson: negative rate");
    const double a = r.gamma_ch * t, b = r.gamma_hc * t;
    if (a == 0.0 && b == 0.0) return q == 0 ? 0.0 : -INFINITY;
    // one-sided limits reduce to an ordinary Poisson law
    if (b == 0.0) return q < 0 ? -INFINITY : -a + q * std::log(a) - std::lgamma(q + 1.0);
    if (a == 0.0) return q > 0 ? -INFINITY : -b - q * std::log(b) - std::lgamma(1.0 - q);
    return -(a + b) + 0.5 * q * std::log(a / b) + log_bessel_i(static_cast<int>(q), 2.0 * std::sqrt(a * b));
}

inline double bidirectional_poisson(long q, const PoissonRates& r, double t) {
    return std::exp(log_bidirectional_poisson(q, r, t));
}

inline double gaussian_work(double w, double mean, double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("gaussian_work: variance must be > 0");
    const double d = w - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// Third-cumulant truncation of P(Delta) with <<Delta^3>> = <<q>>/2.
inline double airy_approx(double delta, double mean_q) {
    if (mean_q == 0.0) throw std::invalid_argument("airy_approx: mean_q must be nonzero");
    return std::cbrt(4.0 / std::abs(mean_q)) * airy_ai(delta / std::cbrt(mean_q / 4.0));
}

}  // namespace heatwork
