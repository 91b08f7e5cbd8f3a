#pragma once

#include <cmath>
#include <numbers>
#include <algorithm>
#include <stdexcept>
#include <vector>

namespace heatwork {

// Airy function Ai with the standard normalization Ai(x) = (1/pi) int_0^inf cos(t^3/3 + x t) dt.
inline double airy_ai(double x) {
    constexpr double pi = std::numbers::pi;
    if (std::abs(x) <= 6.0) {
        // Ai = c1 f - c2 g with the two Maclaurin solutions of y'' = x y
        constexpr double c1 = 0.355028053887817239260, c2 = 0.258819403792806798405;
        const double x3 = x * x * x;
        double f = 1.0, g = x, tf = 1.0, tg = x;
        for (int k = 1; k < 200; ++k) {
            tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
            tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
            f += tf;
            g += tg;
            if (std::abs(tf) < 1e-18 * std::abs(f) && std::abs(tg) < 1e-18 * (std::abs(g) + 1e-300)) break;
        }
        return c1 * f - c2 * g;
    }
    const double z = std::abs(x);
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    // u_k coefficients of the asymptotic expansion, summed until the terms stop shrinking
    double u = 1.0, term_prev = 1.0;
    double even = 1.0, odd = 0.0, plain = 1.0;
    double zp = 1.0;
    for (int k = 1; k < 60; ++k) {
        u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
        zp /= zeta;
        const double term = u * zp;
        if (term > term_prev || term < 1e-17) break;
        term_prev = term;
        const double sgn = (k % 2) ? -1.0 : 1.0;
        plain += sgn * term;
        if (k % 2 == 0)
            even += ((k / 2) % 2 ? -1.0 : 1.0) * term;
        else
            odd += (((k - 1) / 2) % 2 ? -1.0 : 1.0) * term;
    }
    if (x > 0.0) return std::exp(-zeta) / (2.0 * std::sqrt(pi) * std::pow(z, 0.25)) * plain;
    const double ph = zeta + pi / 4.0;
    return (std::sin(ph) * even - std::cos(ph) * odd) / (std::sqrt(pi) * std::pow(z, 0.25));
}

// ln I_q(x) for integer q and x >= 0. Ratios I_n/I_{n-1} come from the
// backward continued fraction; I_0 from the normalization e^x = I_0 + 2 sum I_n.
inline double log_bessel_i(int q, double x) {
    if (x < 0.0) throw std::domain_error("log_bessel_i: x must be >= 0");
    q = std::abs(q);
    if (x == 0.0) return q == 0 ? 0.0 : -INFINITY;
    const int top = static_cast<int>(std::max<double>(q, x) + 60.0 + 12.0 * std::sqrt(x));
    std::vector<double> ratio(top + 2, 0.0);
    double r = 0.0;
    for (int n = top; n >= 1; --n) {
        r = 1.0 / (2.0 * n / x + r);
        ratio[n] = r;
    }
    // sum_{n>=1} I_n/I_0 accumulated with the products of ratios
    double prod = 1.0, tail = 0.0, log_prod_q = 0.0;
    for (int n = 1; n <= top; ++n) {
        prod *= ratio[n];
        tail += prod;
        if (n <= q) log_prod_q += std::log(ratio[n]);
        if (prod < 1e-300) {
            for (int m = n + 1; m <= q; ++m) log_prod_q += std::log(ratio[m]);
            break;
        }
    }
    const double log_i0 = x - std::log1p(2.0 * tail);
    return log_i0 + log_prod_q;
}

inline double bessel_i(int q, double x) { return std::exp(log_bessel_i(q, x)); }

}  // namespace heatwork
