#include <gtest/gtest.h>

#include "heatwork/thermo_checks.hpp"

using namespace heatwork;

namespace {

EngineParams equilibrium() {
    EngineParams p;
    p.nb_c = p.nb_h;
    return p;
}

}  // namespace

TEST(FirstLaw, Fig2a) {
    const auto [mean, dist] = first_law_report(EngineParams{}, 150.0);
    EXPECT_EQ(mean.verdict, Verdict::holds);
    EXPECT_LT(mean.margins.at("relative"), 1e-8);
    EXPECT_NEAR(mean.margins.at("q"), 54.0, 1e-6);
    EXPECT_EQ(dist.verdict, Verdict::violated_as_predicted);
    EXPECT_EQ(dist.margins.at("first_nonvanishing_order"), 3.0);
    EXPECT_NEAR(dist.margins.at("delta3"), 27.0, 1e-4);
    EXPECT_TRUE(mean.passed() && dist.passed());
}

TEST(FirstLaw, EquilibriumHolds) {
    const auto [mean, dist] = first_law_report(equilibrium(), 150.0);
    EXPECT_EQ(mean.verdict, Verdict::holds);
    EXPECT_TRUE(mean.degenerate);
    EXPECT_EQ(dist.verdict, Verdict::holds);
}

TEST(FirstLaw, WeakCouplingRatio) {
    for (double g : {0.1, 0.01, 0.001}) {
        EngineParams p;
        p.g = g;
        const auto dist = first_law_report(p).second;
        EXPECT_NEAR(dist.margins.at("delta3_over_q"), 0.5, 1e-4) << g;
    }
}

TEST(FirstLaw, SameVerdictAcrossBackends) {
    const EngineParams p;
    const auto a = first_law_report(AnalyticProvider(p)).second;
    const auto b = first_law_report(FlowProvider(p)).second;
    const auto c = first_law_report(FockProvider(p, 10)).second;
    EXPECT_EQ(a.verdict, Verdict::violated_as_predicted);
    EXPECT_EQ(b.verdict, a.verdict);
    EXPECT_EQ(c.verdict, a.verdict);
    EXPECT_NEAR(b.margins.at("delta3"), a.margins.at("delta3"), 1e-6);
}

TEST(FluctuationTheorem, Fig2aMarginalAndJoint) {
    FluctuationOptions o;
    const auto r = fluctuation_theorem_report(EngineParams{}, 20.0, 5, o);
    EXPECT_EQ(r.verdict, Verdict::holds);
    EXPECT_GT(r.margins.at("joint_points"), 100.0);
    EXPECT_LT(r.margins.at("joint_defect"), 1e-4);
    EXPECT_LT(r.margins.at("marginal_defect"), 1e-5);
}

TEST(FluctuationTheorem, EquilibriumSymmetric) {
    // near the 1e-10 floor the ratio is limited by FFT rounding (~1e-15 absolute)
    FluctuationOptions o;
    o.floor = 1e-8;
    const auto r = fluctuation_theorem_report(equilibrium(), 20.0, 5, o);
    EXPECT_EQ(r.verdict, Verdict::holds);
    EXPECT_LT(std::max(r.margins.at("marginal_defect"), r.margins.at("joint_defect")), 1e-6);
}

TEST(FluctuationTheorem, InconclusiveWithoutSupport) {
    FluctuationOptions o;
    o.joint = false;
    o.floor = 1.0;
    const auto r = fluctuation_theorem_report(EngineParams{}, 150.0, 5, o);
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    EXPECT_FALSE(r.passed());
}

TEST(FluctuationTheorem, PoissonExact) {
    EngineParams p;
    p.g = 0.05;
    EXPECT_LT(poisson_ft_defect(poisson_rates(p), 12000.0, 40), 1e-10);
}

TEST(Tur, Fig2aValues) {
    const auto [tur, second] = tur_and_second_law_report(EngineParams{}, 150.0);
    EXPECT_NEAR(tur.margins.at("lhs"), 0.03875, 1e-5);
    EXPECT_NEAR(tur.margins.at("rhs"), 0.02173, 1e-5);
    EXPECT_NEAR(tur.margins.at("margin"), 0.03875 - 0.02173, 1e-4);
    EXPECT_EQ(tur.verdict, Verdict::holds);
    EXPECT_EQ(second.verdict, Verdict::holds);
    EXPECT_GT(second.margins.at("entropy_production"), 0.0);
}

TEST(Tur, EquilibriumDegenerate) {
    const auto [tur, second] = tur_and_second_law_report(equilibrium(), 150.0);
    EXPECT_TRUE(tur.degenerate);
    EXPECT_TRUE(tur.passed());
    EXPECT_EQ(second.margins.at("entropy_production"), 0.0);
}

TEST(Tur, SweepHoldsEverywhere) {
    const auto pts = tur_sweep_points();
    ASSERT_EQ(pts.size(), 125u);
    for (const auto& p : pts) {
        EXPECT_GT(p.nb_h, 0.0);
        EXPECT_LE(p.nb_h, 2.0);
        EXPECT_LT(p.nb_c, p.nb_h);
        EXPECT_GE(p.g, 0.05 - 1e-12);
        EXPECT_LE(p.g, 20.0 + 1e-9);
    }
    for (const auto& r : tur_sweep()) {
        EXPECT_EQ(r.verdict, Verdict::holds);
        EXPECT_GE(r.margins.at("margin"), 0.0);
    }
}

TEST(Report, Json) {
    const auto r = first_law_report(EngineParams{}, 150.0).second;
    const auto j = to_json(r);
    EXPECT_EQ(j["verdict"], "violated-as-predicted");
    EXPECT_EQ(j["margins"]["first_nonvanishing_order"], 3.0);
    EXPECT_EQ(j["params"]["nb_c"], 0.1);
}
