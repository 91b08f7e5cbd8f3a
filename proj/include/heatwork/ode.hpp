#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace heatwork {

using CVec = std::vector<std::complex<double>>;

struct integration_failure : numeric_error {
    integration_failure(const std::string& what, CVec state, double t)
        : numeric_error(what), last_state(std::move(state)), t(t) {}
    CVec last_state;
    double t;
};

// Dormand-Prince 5(4) with error control on the real and imaginary part of
// every component separately.
class DormandPrince {
public:
    using Rhs = std::function<void(double, const CVec&, CVec&)>;

    DormandPrince(Rhs f, double rtol, double atol) : f_(std::move(f)), rtol_(rtol), atol_(atol) {}

    std::size_t steps() const { return accepted_; }
    std::size_t rejected() const { return rejected_; }

    // Advance y from t0 to t1 in place. The last accepted step size is kept
    // between calls so piecewise integration does not restart cold.
    void integrate(CVec& y, double t0, double t1) {
        const std::size_t n = y.size();
        if (k_[0].size() != n)
            for (auto& k : k_) k.assign(n, 0.0);
        tmp_.resize(n);
        ynew_.resize(n);
        double t = t0;
        if (t1 <= t0) return;
        if (h_ <= 0.0) h_ = initial_step(y, t0, t1 - t0);
        f_(t, y, k_[0]);
        while (t < t1) {
            double h = std::min(h_, t1 - t);
            if (h < 1e-14 * std::max(1.0, std::abs(t)))
                throw integration_failure("ODE step size underflow at t=" + std::to_string(t), y, t);
            if (accepted_ + rejected_ > max_steps)
                throw integration_failure("ODE step budget exhausted at t=" + std::to_string(t), y, t);
            const double err = attempt(y, t, h);
            if (!std::isfinite(err)) {
                ++rejected_;
                h_ = 0.2 * h;
                continue;
            }
            if (err <= 1.0) {
                ++accepted_;
                t += h;
                y.swap(ynew_);
                k_[0].swap(k_[6]);  // first-same-as-last
                const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                if (h == h_ || fac < 1.0) h_ = h * fac;
            } else {
                ++rejected_;
                h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
        }
    }

    std::size_t max_steps = 50'000'000;

private:
    double initial_step(const CVec& y, double t0, double span) {
        CVec f0(y.size());
        f_(t0, y, f0);
        double d0 = 0, d1 = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double sc = atol_ + rtol_ * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(f0[i]) / sc);
        }
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min(h, span);
    }

    double attempt(const CVec& y, double t, double h) {
        static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
        static constexpr double a21 = 1. / 5;
        static constexpr double a31 = 3. / 40, a32 = 9. / 40;
        static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
        static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561,
                                a54 = -212. / 729;
        static constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                                a65 = -5103. / 18656;
        static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784,
                                b6 = 11. / 84;
        static constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200,
                                e6 = 22. / 525, e7 = -1. / 40;
        const std::size_t n = y.size();
        auto& k = k_;
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * k[0][i];
        f_(t + c2 * h, tmp_, k[1]);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
        f_(t + c3 * h, tmp_, k[2]);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
        f_(t + c4 * h, tmp_, k[3]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
        f_(t + c5 * h, tmp_, k[4]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i]);
        f_(t + h, tmp_, k[5]);
        for (std::size_t i = 0; i < n; ++i)
            ynew_[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] + b6 * k[5][i]);
        f_(t + h, ynew_, k[6]);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                                e7 * k[6][i]);
            const double sr = atol_ + rtol_ * std::max(std::abs(y[i].real()), std::abs(ynew_[i].real()));
            const double si = atol_ + rtol_ * std::max(std::abs(y[i].imag()), std::abs(ynew_[i].imag()));
            acc += (e.real() / sr) * (e.real() / sr) + (e.imag() / si) * (e.imag() / si);
        }
        return std::sqrt(acc / (2.0 * static_cast<double>(n)));
    }

    Rhs f_;
    double rtol_, atol_;
    double h_ = 0.0;
    std::size_t accepted_ = 0, rejected_ = 0;
    CVec k_[7], tmp_, ynew_;
};

}  // namespace heatwork
