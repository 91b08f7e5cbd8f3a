#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgf_analytic.hpp"
#include "fock_oracle.hpp"
#include "wigner_flow.hpp"

namespace heatwork {

// Long-time CGF rate S(chi, lambda)/t from some backend. Implementations are
// immutable after construction and safe to call concurrently.
class CgfProvider {
public:
    virtual ~CgfProvider() = default;

    virtual std::string name() const = 0;
    virtual const EngineParams& params() const = 0;
    virtual double gamma() const { return 0.0; }

    virtual cplx rate(cplx chi, cplx lambda) const = 0;

    // Rates at a sequence of points, continued from the origin through each
    // point in order. Backends without branch tracking evaluate pointwise.
    virtual std::vector<cplx> path(std::span<const cplx> chis, std::span<const cplx> lambdas) const {
        std::vector<cplx> out(chis.size());
        for (std::size_t i = 0; i < chis.size(); ++i) out[i] = rate(chis[i], lambdas[i]);
        return out;
    }

    // Exact |lambda| -> infinity limit where the backend knows it.
    virtual std::optional<cplx> plateau(double /*chi*/) const { return std::nullopt; }
};

class AnalyticProvider final : public CgfProvider {
public:
    explicit AnalyticProvider(EngineParams p) : cgf_(p) {}
    std::string name() const override { return "analytic"; }
    const EngineParams& params() const override { return cgf_.params(); }
    cplx rate(cplx chi, cplx lambda) const override { return cgf_.rate(chi, lambda); }
    std::vector<cplx> path(std::span<const cplx> chis, std::span<const cplx> lambdas) const override {
        return cgf_.path(chis, lambdas);
    }
    std::optional<cplx> plateau(double chi) const override { return cgf_.plateau(chi); }

private:
    AnalyticCgf cgf_;
};

enum class FlowMethod {
    slope,        // long-time slope of the integrated Gaussian flow
    fixed_point,  // Newton solve for the stationary flow, continued along paths
};

class FlowProvider final : public CgfProvider {
public:
    FlowProvider(EngineParams p, double gamma = 0.0, FlowMethod method = FlowMethod::fixed_point,
                 double horizon = 150.0, double tol = 1e-10)
        : p_(p), gamma_(gamma), method_(method), horizon_(horizon), tol_(tol) {
        if (method == FlowMethod::fixed_point) fixed_ = std::make_shared<FixedPointCgf>(p, gamma);
    }
    std::string name() const override { return method_ == FlowMethod::slope ? "ode" : "ode-fixed-point"; }
    const EngineParams& params() const override { return p_; }
    double gamma() const override { return gamma_; }
    cplx rate(cplx chi, cplx lambda) const override {
        if (fixed_) return fixed_->rate(chi, lambda);
        return cgf_rate_numeric(FieldPoint{chi, 0.0, lambda, gamma_}, p_, horizon_, tol_).rate;
    }
    std::vector<cplx> path(std::span<const cplx> chis, std::span<const cplx> lambdas) const override {
        if (fixed_) return fixed_->path(chis, lambdas);
        return CgfProvider::path(chis, lambdas);
    }

private:
    EngineParams p_;
    double gamma_;
    FlowMethod method_;
    double horizon_, tol_;
    std::shared_ptr<const FixedPointCgf> fixed_;
};

class FockProvider final : public CgfProvider {
public:
    FockProvider(EngineParams p, int n_max, double gamma = 0.0, FockOptions opt = {})
        : p_(p), n_max_(n_max), gamma_(gamma), opt_(opt) {}
    std::string name() const override { return "fock"; }
    const EngineParams& params() const override { return p_; }
    double gamma() const override { return gamma_; }
    int n_max() const { return n_max_; }
    cplx rate(cplx chi, cplx lambda) const override {
        return dominant_eigenvalue(build_liouvillian(p_, FieldPoint{chi, 0.0, lambda, gamma_}, n_max_, opt_), opt_)
            .value;
    }

private:
    EngineParams p_;
    int n_max_;
    double gamma_;
    FockOptions opt_;
};

}  // namespace heatwork
