// Evaluates S(chi, lambda) with the three backends and prints the
// low-order cumulants next to their closed forms.
#include <cstdio>

#include "heatwork/heatwork.hpp"

using namespace heatwork;

int main() {
    EngineParams p;  // g = kappa = 1, nb_h = 1, nb_c = 0.1
    const AnalyticProvider analytic(p);
    const FlowProvider flow(p);
    const FockProvider fock(p, 8);

    std::printf("affinity A = %.6f\n\n", affinity(p));
    std::printf("%6s %6s  %-26s %-26s %-26s\n", "chi", "lambda", "analytic", "flow", "fock n=8");
    for (double chi : {0.0, 0.3, -0.5})
        for (double lam : {0.0, 0.2, -0.4}) {
            const cplx a = analytic.rate(chi, lam), f = flow.rate(chi, lam), k = fock.rate(chi, lam);
            std::printf("%6.2f %6.2f  %+.6e%+.6ei %+.6e%+.6ei %+.6e%+.6ei\n", chi, lam, a.real(), a.imag(), f.real(),
                        f.imag(), k.real(), k.imag());
        }

    const double t = 150.0;
    const CumulantTable fd = scaled(cumulants_fd(analytic, 3), t);
    const CumulantTable exact = scaled(cumulants_analytic(p), t);
    std::printf("\ncumulants at t = %.0f (finite differences vs closed form)\n", t);
    for (const auto& [key, e] : fd.entries) {
        const auto it = exact.entries.find(key);
        if (it == exact.entries.end()) continue;
        std::printf("  <<q^%d w^%d>>  %14.8f  %14.8f\n", key.first, key.second, e.value.real(),
                    it->second.value.real());
    }
    std::printf("  <<Delta^3>>   %14.8f  (= <<q>>/2 = %.8f)\n", fd.delta(3), 0.5 * fd.q(1, 0));
}
