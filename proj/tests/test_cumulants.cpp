#include <gtest/gtest.h>

#include "heatwork/cumulants.hpp"

using namespace heatwork;

namespace {

EngineParams fig2a() { return EngineParams{}; }

EngineParams fig2c() {
    EngineParams p;
    p.g = 0.05;
    return p;
}

// High-precision derivatives of the closed-form CGF (60-digit arithmetic).
struct Reference {
    int k, m;
    double value;
};
const Reference fig2a_ref[] = {
    {1, 0, 0.36},         {0, 1, 0.36},         {2, 0, 0.75328},      {1, 1, 0.75328},      {0, 2, 0.75328},
    {3, 0, 1.71240192},   {2, 1, 1.71240192},   {1, 2, 1.67640192},   {0, 3, 1.78440192},   {4, 0, 6.6571813888},
    {2, 2, 6.5999973888}, {0, 4, 7.8206373888}, {5, 0, 33.3111170285568}, {3, 2, 33.2666498285568},
    {0, 5, 41.3564546285568},
};
const Reference fig2c_ref[] = {
    {1, 0, 0.0044554455445544554}, {2, 0, 0.0065341123613390650}, {3, 0, 0.0048876215428184896},
    {1, 2, 0.0026819554316529176}, {0, 3, 0.00049834598159900127}, {4, 0, 0.0074938293119170088},
    {0, 5, 0.00024229887828113403},
};

}  // namespace

TEST(CumulantsAnalytic, Fig2aValues) {
    const auto t = scaled(cumulants_analytic(fig2a()), 150.0);
    EXPECT_NEAR(t.q(1), 54.0, 1e-12);
    EXPECT_NEAR(t.q(2), 112.992, 1e-10);
    EXPECT_NEAR(t.q(2), 54.0 * 6.5 / 4.5 + 34.992, 1e-10);
    EXPECT_NEAR(t.delta(3), 27.0, 1e-12);
}

TEST(CumulantsAnalytic, ThirdOrderIdentity) {
    for (const auto& p : {fig2a(), fig2c()}) {
        const auto t = cumulants_analytic(p);
        const double combo = t.q(0, 3) - 3 * t.q(1, 2) + 3 * t.q(2, 1) - t.q(3, 0);
        EXPECT_NEAR(combo, 0.5 * t.q(1), 1e-14);
    }
}

TEST(CumulantsAnalytic, MatchesHighPrecisionReference) {
    const auto a = cumulants_analytic(fig2a());
    for (const auto& r : fig2a_ref)
        if (r.k + r.m <= 3) EXPECT_NEAR(a.q(r.k, r.m), r.value, 1e-13 * r.value);
    const auto c = cumulants_analytic(fig2c());
    for (const auto& r : fig2c_ref)
        if (r.k + r.m <= 3) EXPECT_NEAR(c.q(r.k, r.m), r.value, 1e-13 * r.value);
}

TEST(CumulantsAnalytic, EquilibriumNoiseFinite) {
    EngineParams p;
    p.nb_c = p.nb_h;
    const auto t = cumulants_analytic(p);
    EXPECT_EQ(t.q(1), 0.0);
    EXPECT_GT(t.q(2), 0.0);
    EngineParams q = p;
    q.nb_c = p.nb_h * (1 - 1e-7);
    EXPECT_NEAR(cumulants_analytic(q).q(2), t.q(2), 1e-6);
}

TEST(CumulantsFd, AnalyticBackendThroughFifthOrder) {
    const auto fd = cumulants_fd(AnalyticProvider(fig2a()), 5);
    for (const auto& r : fig2a_ref) {
        const auto& e = fd.entries.at({r.k, r.m});
        const double tol = (r.k + r.m <= 3 ? 1e-7 : 1e-5) * r.value;
        EXPECT_NEAR(e.value.real(), r.value, tol) << r.k << "," << r.m;
        EXPECT_LT(std::abs(e.value.imag()), 1e-8);
        EXPECT_EQ(e.provenance, Provenance::finite_difference);
    }
    const auto fc = cumulants_fd(AnalyticProvider(fig2c()), 5);
    for (const auto& r : fig2c_ref)
        EXPECT_NEAR(fc.q(r.k, r.m), r.value, (r.k + r.m <= 3 ? 1e-6 : 1e-4) * r.value) << r.k << "," << r.m;
}

TEST(CumulantsFd, MatchesFormulasToThirdOrder) {
    for (const auto& p : {fig2a(), fig2c()}) {
        const auto fd = cumulants_fd(AnalyticProvider(p), 3);
        const auto an = cumulants_analytic(p);
        for (const auto& [key, e] : an.entries)
            EXPECT_NEAR(fd.entries.at(key).value.real(), e.value.real(), 1e-4 * std::abs(e.value));
    }
}

TEST(CumulantsFd, SecondOrderEqualities) {
    const auto fd = cumulants_fd(AnalyticProvider(fig2a()), 2);
    EXPECT_NEAR(fd.q(2, 0) - fd.q(1, 1), 0.0, 1e-6);
    EXPECT_NEAR(fd.q(1, 0), fd.q(0, 1), 1e-8 * fd.q(1, 0));
}

TEST(CumulantsFd, OddCumulantsVanishAtEquilibrium) {
    EngineParams p;
    p.nb_c = p.nb_h;
    const auto fd = cumulants_fd(AnalyticProvider(p), 3);
    EXPECT_NEAR(fd.q(1, 0), 0.0, 1e-8);
    EXPECT_NEAR(fd.q(3, 0), 0.0, 1e-8);
}

TEST(CumulantsFd, DeltaCumulants) {
    for (const auto& p : {fig2a(), fig2c()}) {
        const auto fd = cumulants_fd(AnalyticProvider(p), 5);
        const double c1 = mean_current(p);
        EXPECT_NEAR(fd.delta(1), 0.0, 1e-10);
        EXPECT_NEAR(fd.delta(2), 0.0, 1e-9);
        EXPECT_NEAR(fd.delta(3), 0.5 * c1, 1e-6 * c1);
        EXPECT_NEAR(fd.delta(4), 0.0, 1e-7);
    }
}

TEST(CumulantsFd, FifthDeltaCumulantSelectsDenominator) {
    // 60-digit references: 0.36 (fig2a) and -0.0043451622389961768 (fig2c)
    const auto a = check_delta5(cumulants_fd(AnalyticProvider(fig2a()), 5), fig2a());
    EXPECT_NEAR(a.fd, 0.36, 1e-6);
    EXPECT_TRUE(a.matches_variant);
    EXPECT_FALSE(a.matches_printed);
    const auto c = check_delta5(cumulants_fd(AnalyticProvider(fig2c()), 5), fig2c());
    EXPECT_NEAR(c.fd, -0.0043451622389961768, 1e-8);
    EXPECT_TRUE(c.matches_variant);
    EXPECT_FALSE(c.matches_printed);
}

TEST(CumulantsFd, FirstNonvanishingDeltaIsThird) {
    for (double nc : {0.0, 0.1, 0.5})
        for (double g : {0.05, 1.0, 3.0}) {
            EngineParams p;
            p.g = g;
            p.nb_c = nc;
            const auto fd = cumulants_fd(AnalyticProvider(p), 3);
            const double scale = 1e-6 * (1.0 + fd.q(1));
            int first = 0;
            for (int k = 1; k <= 3 && !first; ++k)
                if (std::abs(fd.delta(k)) > scale) first = k;
            EXPECT_EQ(first, 3) << "g=" << g << " nb_c=" << nc;
        }
}

TEST(CumulantsFd, FockBackendToSecondOrder) {
    const EngineParams p = fig2a();
    const auto fd = cumulants_fd(FockProvider(p, 14), 2);
    const auto an = cumulants_analytic(p);
    for (auto key : {std::pair{1, 0}, std::pair{0, 1}, std::pair{2, 0}, std::pair{1, 1}, std::pair{0, 2}}) {
        EXPECT_NEAR(fd.entries.at(key).value.real(), an.entries.at(key).value.real(),
                    1e-3 * an.entries.at(key).value.real());
        EXPECT_EQ(fd.entries.at(key).provenance, Provenance::oracle);
    }
}

TEST(CumulantsFd, FlowBackendToSecondOrder) {
    const EngineParams p = fig2a();
    const auto fd = cumulants_fd(FlowProvider(p), 3);
    const auto an = cumulants_analytic(p);
    for (const auto& [key, e] : an.entries)
        EXPECT_NEAR(fd.entries.at(key).value.real(), e.value.real(), 1e-6 * std::abs(e.value));
}

TEST(CumulantsFd, RejectsOrderAboveFive) {
    EXPECT_THROW(cumulants_fd(AnalyticProvider(fig2a()), 6), std::invalid_argument);
}

TEST(CumulantsFd, JsonCarriesProvenance) {
    const auto j = to_json(cumulants_fd(AnalyticProvider(fig2a()), 2));
    EXPECT_EQ(j["backend"], "analytic");
    EXPECT_EQ(j["entries"][0]["provenance"], "finite-difference");
    EXPECT_TRUE(j["entries"][0].contains("uncertainty"));
}
