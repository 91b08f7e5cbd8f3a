#pragma once

#include <armadillo>
#include <cmath>
#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "ode.hpp"
#include "wigner_flow.hpp"

namespace heatwork {

// Counting-field superoperator on the truncated two-mode Fock space, in the
// frame where H = g(a_c^+ a_h + a_h^+ a_c) and I = -ig(a_c^+ a_h - a_h^+ a_c).
// Density operators are column-stacked: vec(A X B) = (B^T kron A) vec(X).
// Basis state |n_h, n_c> has index n_h (n_max+1) + n_c.
struct FockLiouvillian {
    int n_max = 0;
    arma::uword dim = 0;
    arma::sp_cx_mat matrix;
    FieldPoint point;
    EngineParams params;

    arma::uword total_number(arma::uword basis) const {
        return basis / (n_max + 1) + basis % (n_max + 1);
    }
};

struct FockOptions {
    arma::uword dim_cap = 2'000'000;  // cap on dim^2
    arma::uword dense_limit = 300;    // sector size up to which the dense solver is used
};

namespace detail {

inline arma::sp_cx_mat annihilator(int n_max) {
    arma::sp_cx_mat a(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline arma::sp_cx_mat speye_cx(arma::uword n) {
    arma::sp_cx_mat e(n, n);
    for (arma::uword i = 0; i < n; ++i) e(i, i) = 1.0;
    return e;
}

}  // namespace detail

inline FockLiouvillian build_liouvillian(const EngineParams& p, const FieldPoint& f, int n_max,
                                         const FockOptions& opt = {}) {
    if (n_max < 1) throw std::invalid_argument("build_liouvillian: n_max must be >= 1");
    const arma::uword d = static_cast<arma::uword>((n_max + 1) * (n_max + 1));
    if (d * d > opt.dim_cap)
        throw resource_error("Fock superoperator dimension " + std::to_string(d * d) + " exceeds cap " +
                             std::to_string(opt.dim_cap));
    const arma::sp_cx_mat a = detail::annihilator(n_max);
    const arma::sp_cx_mat e1 = detail::speye_cx(n_max + 1);
    const arma::sp_cx_mat ah = arma::kron(a, e1), ac = arma::kron(e1, a);
    const arma::sp_cx_mat ahd = ah.t(), acd = ac.t();  // .t() is the Hermitian transpose
    const arma::sp_cx_mat Id = detail::speye_cx(d);

    const arma::sp_cx_mat H = p.g * (acd * ah + ahd * ac);
    const arma::sp_cx_mat Iop = cplx(0.0, -p.g) * (acd * ah - ahd * ac);
    const arma::sp_cx_mat K = H + f.gamma * Iop;

    // left(A) = A rho, right(B) = rho B
    auto left = [&](const arma::sp_cx_mat& A) { return arma::sp_cx_mat(arma::kron(Id, A)); };
    auto right = [&](const arma::sp_cx_mat& B) { return arma::sp_cx_mat(arma::kron(B.st(), Id)); };

    arma::sp_cx_mat L = -I1 * (left(K) - right(K)) - I1 * (f.lambda / 2.0) * (left(Iop) + right(Iop));
    auto dissipator = [&](const arma::sp_cx_mat& op, const arma::sp_cx_mat& opd, double kappa, double n, cplx chi) {
        const arma::sp_cx_mat nop = opd * op, aop = op * opd;
        L += kappa * (n + 1.0) *
             (std::exp(I1 * chi) * arma::sp_cx_mat(arma::kron(opd.st(), op)) - 0.5 * (left(nop) + right(nop)));
        L += kappa * n *
             (std::exp(-I1 * chi) * arma::sp_cx_mat(arma::kron(op.st(), opd)) - 0.5 * (left(aop) + right(aop)));
    };
    dissipator(ah, ahd, p.kappa_h, p.nb_h, f.chi_h);
    dissipator(ac, acd, p.kappa_c, p.nb_c, f.chi_c);
    return {n_max, d, L, f, p};
}

inline FockLiouvillian build_liouvillian(const EngineParams& p, const CountingPoint& pt, int n_max,
                                         const FockOptions& opt = {}) {
    return build_liouvillian(p, FieldPoint::from(pt), n_max, opt);
}

// Indices of the vectorized density operator with equal total photon number
// in ket and bra. The superoperator is block diagonal in the difference of
// the two numbers, and states commuting with the number operator live here.
inline arma::uvec population_sector(const FockLiouvillian& L, long order = 0) {
    std::vector<arma::uword> idx;
    for (arma::uword col = 0; col < L.dim; ++col)
        for (arma::uword row = 0; row < L.dim; ++row)
            if (static_cast<long>(L.total_number(row)) - static_cast<long>(L.total_number(col)) == order)
                idx.push_back(col * L.dim + row);
    return arma::uvec(idx);
}

inline arma::sp_cx_mat sector_block(const FockLiouvillian& L, const arma::uvec& idx) {
    std::vector<long> pos(L.matrix.n_rows, -1);
    for (arma::uword k = 0; k < idx.n_elem; ++k) pos[idx[k]] = static_cast<long>(k);
    std::vector<arma::uword> rows, cols;
    std::vector<cplx> vals;
    for (auto it = L.matrix.begin(); it != L.matrix.end(); ++it) {
        const long r = pos[it.row()], c = pos[it.col()];
        if (r >= 0 && c >= 0) {
            rows.push_back(static_cast<arma::uword>(r));
            cols.push_back(static_cast<arma::uword>(c));
            vals.push_back(*it);
        } else if ((r >= 0) != (c >= 0)) {
            throw numeric_error("superoperator couples different coherence sectors");
        }
    }
    arma::umat loc(2, vals.size());
    for (std::size_t k = 0; k < vals.size(); ++k) {
        loc(0, k) = rows[k];
        loc(1, k) = cols[k];
    }
    return arma::sp_cx_mat(loc, arma::cx_vec(vals), idx.n_elem, idx.n_elem);
}

// Full spectrum, assembled sector by sector (dense eigensolves).
inline arma::cx_vec spectrum(const FockLiouvillian& L) {
    std::vector<cplx> all;
    const long top = 2L * L.n_max;
    for (long m = -top; m <= top; ++m) {
        const arma::uvec idx = population_sector(L, m);
        if (idx.is_empty()) continue;
        arma::cx_vec ev;
        if (!arma::eig_gen(ev, arma::cx_mat(sector_block(L, idx))))
            throw convergence_error("dense eigensolver failed in sector " + std::to_string(m));
        all.insert(all.end(), ev.begin(), ev.end());
    }
    return arma::cx_vec(all);
}

struct DominantEigen {
    cplx value;
    double residual;  // |L v - nu v| / |v|
    std::string method;
};

// Eigenvalue with the largest real part in the population sector, which holds
// the steady state and every initial state diagonal in photon number.
inline DominantEigen dominant_eigenvalue(const FockLiouvillian& L, const FockOptions& opt = {}) {
    const arma::uvec idx = population_sector(L, 0);
    const arma::sp_cx_mat S = sector_block(L, idx);
    auto residual = [&](cplx nu, const arma::cx_vec& v) {
        return arma::norm(arma::cx_vec(S * v) - nu * v) / arma::norm(v);
    };
    if (S.n_rows <= opt.dense_limit) {
        arma::cx_vec ev;
        arma::cx_mat V;
        if (!arma::eig_gen(ev, V, arma::cx_mat(S)))
            throw convergence_error("dense eigensolver failed");
        const arma::uword k = arma::index_max(arma::real(ev));
        return {ev[k], residual(ev[k], V.col(k)), "dense"};
    }
    // Shift-invert: eigenvalues nearest a shift to the right of the spectrum,
    // then re-centre on the best candidate until the selection is stable.
    cplx shift = 0.5 * (L.params.kappa_h + L.params.kappa_c);
    cplx best = 0.0;
    double res = 0.0;
    for (int pass = 0; pass < 6; ++pass) {
        arma::cx_vec ev;
        arma::cx_mat V;
        arma::eigs_opts eo;
        eo.tol = 1e-13;
        if (!arma::eigs_gen(ev, V, S, 8, shift, eo))
            throw convergence_error("ARPACK shift-invert did not converge (shift " +
                                    std::to_string(shift.real()) + ")");
        const arma::uword k = arma::index_max(arma::real(ev));
        const bool stable = pass > 0 && std::abs(ev[k] - best) < 1e-12 * (1.0 + std::abs(best));
        best = ev[k];
        res = residual(best, V.col(k));
        if (stable) break;
        shift = best + 0.25 * (L.params.kappa_h + L.params.kappa_c);
    }
    return {best, res, "shift-invert"};
}

inline arma::cx_vec thermal_product_vec(const EngineParams& p, int n_max) {
    auto populations = [&](double nb) {
        arma::vec w(n_max + 1);
        for (int n = 0; n <= n_max; ++n) w[n] = nb == 0.0 ? (n == 0) : std::pow(nb / (nb + 1.0), n);
        return arma::vec(w / arma::accu(w));
    };
    const arma::vec wh = populations(p.nb_h), wc = populations(p.nb_c);
    const arma::uword d = static_cast<arma::uword>((n_max + 1) * (n_max + 1));
    arma::cx_vec rho(d * d, arma::fill::zeros);
    for (int h = 0; h <= n_max; ++h)
        for (int c = 0; c <= n_max; ++c) {
            const arma::uword i = static_cast<arma::uword>(h * (n_max + 1) + c);
            rho[i * d + i] = wh[h] * wc[c];
        }
    return rho;
}

inline cplx trace_vec(const arma::cx_vec& rho, arma::uword dim) {
    cplx tr = 0.0;
    for (arma::uword i = 0; i < dim; ++i) tr += rho[i * dim + i];
    return tr;
}

// ln Tr rho(t). The state is renormalized after every unit-time chunk and the
// logarithms accumulated, which keeps the phase continuous.
inline cplx evolve_trace(const FockLiouvillian& L, const arma::cx_vec& rho0, double t, double tol = 1e-10) {
    const arma::cx_mat dense_rho = arma::reshape(rho0, L.dim, L.dim);
    const cplx tr0 = arma::trace(dense_rho);
    if (std::abs(tr0 - 1.0) > 1e-12) throw std::invalid_argument("evolve_trace: initial state trace != 1");
    if (arma::norm(dense_rho - dense_rho.t(), "inf") > 1e-12)
        throw std::invalid_argument("evolve_trace: initial state not Hermitian");
    const arma::vec eval = arma::eig_sym(arma::cx_mat(0.5 * (dense_rho + dense_rho.t())));
    if (eval.min() < -1e-12) throw std::invalid_argument("evolve_trace: initial state not positive");

    const arma::uword n = rho0.n_elem;
    DormandPrince dp(
        [&](double, const CVec& y, CVec& dy) {
            const arma::cx_vec yv(const_cast<cplx*>(y.data()), n, false, true);
            arma::cx_vec dv(dy.data(), n, false, true);
            dv = L.matrix * yv;
        },
        tol, tol * 1e-3);
    CVec y(rho0.begin(), rho0.end());
    cplx logS = 0.0;
    double now = 0.0;
    while (now < t) {
        const double next = std::min(t, now + 1.0);
        dp.integrate(y, now, next);
        cplx tr = 0.0;
        for (arma::uword i = 0; i < L.dim; ++i) tr += y[i * L.dim + i];
        logS += std::log(tr);
        for (auto& v : y) v /= tr;
        now = next;
    }
    return logS;
}

inline void write_triplets(std::ostream& os, const FockLiouvillian& L) {
    os.precision(17);
    for (auto it = L.matrix.begin(); it != L.matrix.end(); ++it)
        os << it.row() << ' ' << it.col() << ' ' << (*it).real() << ' ' << (*it).imag() << '\n';
}

}  // namespace heatwork
