#include <gtest/gtest.h>

#include <cmath>

#include "heatwork/model.hpp"

using namespace heatwork;

TEST(Affinity, ReferenceOccupations) {
    EngineParams p;  // nb_h = 1, nb_c = 0.1
    EXPECT_NEAR(affinity(p), std::log(5.5), 1e-14);
    EXPECT_NEAR(affinity(p), 1.704748092238425, 1e-12);
}

TEST(Affinity, EquilibriumIsZero) {
    for (double n : {0.01, 0.3, 1.0, 7.5}) {
        EngineParams p;
        p.nb_h = p.nb_c = n;
        EXPECT_EQ(affinity(p), 0.0);
    }
}

TEST(Affinity, SwapFlipsSign) {
    EngineParams p;
    p.nb_h = 0.7;
    p.nb_c = 0.2;
    EngineParams q = p;
    std::swap(q.nb_h, q.nb_c);
    EXPECT_DOUBLE_EQ(affinity(p), -affinity(q));
    EXPECT_GT(affinity(p), 0.0);
}

TEST(Affinity, ContinuousAtEquilibrium) {
    EngineParams p;
    p.nb_c = 0.5;
    double prev = 1.0;
    for (double d : {1e-1, 1e-2, 1e-3, 1e-4}) {
        p.nb_h = 0.5 + d;
        const double a = affinity(p);
        EXPECT_GT(a, 0.0);
        EXPECT_LT(a, prev);
        prev = a;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Affinity, ZeroOccupationThrows) {
    EngineParams p;
    p.nb_c = 0.0;
    EXPECT_THROW(affinity(p), std::domain_error);
}

TEST(Validate, DefaultIsClean) {
    EngineParams p;
    EXPECT_TRUE(validate(p).empty());
}

TEST(Validate, ZeroKappaIsError) {
    EngineParams p;
    p.kappa_c = 0.0;
    auto r = validate(p);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].field, "kappa_c");
}

TEST(Validate, StrongCouplingWarns) {
    EngineParams p;
    p.g = 5.0;
    p.omega_h = 10.0;
    p.omega_c = 8.0;
    auto r = validate(p);
    EXPECT_TRUE(r.ok());
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].message.find("weak-coupling"), std::string::npos);
}

TEST(Validate, FrequencyOrdering) {
    EngineParams p;
    p.omega_h = 1.0;
    p.omega_c = 2.0;
    EXPECT_FALSE(validate(p).ok());
}
