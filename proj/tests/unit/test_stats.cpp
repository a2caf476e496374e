#include <gtest/gtest.h>

#include <random>

#include "oracles/welch_oracle.hpp"
#include "support/test_util.hpp"

using namespace simpeval;

TEST(Welch, AgainstQuadratureOracle) {
    std::vector<double> a, b;
    for (int i = 0; i < 50; ++i) a.push_back(i < 25 ? 1.0 : 0.0);
    for (int i = 0; i < 50; ++i) b.push_back(i < 45 ? 1.0 : 0.0);
    const auto got = welch_t_test(a, b);
    const auto want = oracle::welch(a, b);
    EXPECT_NEAR(got.t, want.t, 1e-12);
    EXPECT_NEAR(got.df, want.df, 1e-9);
    EXPECT_NEAR(got.p, want.p, 1e-8);
    EXPECT_LT(got.p, 0.05);
}

TEST(Welch, SelfComparison) {
    const std::vector<double> a{1, 0, 1, 1, 0};
    const auto r = welch_t_test(a, a);
    EXPECT_DOUBLE_EQ(r.t, 0.0);
    EXPECT_DOUBLE_EQ(r.p, 1.0);
}

TEST(Welch, SymmetricInArguments) {
    const std::vector<double> a{1, 1, 0, 1, 1, 1}, b{0, 1, 0, 0};
    EXPECT_DOUBLE_EQ(welch_t_test(a, b).p, welch_t_test(b, a).p);
    EXPECT_DOUBLE_EQ(welch_t_test(a, b).t, -welch_t_test(b, a).t);
}

TEST(Welch, SameProportionDifferentSizes) {
    const std::vector<double> a{1, 0, 1, 0}, b{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    const auto r = welch_t_test(a, b);
    EXPECT_DOUBLE_EQ(r.t, 0.0);
    EXPECT_DOUBLE_EQ(r.p, 1.0);
}

TEST(Welch, Degenerate) {
    const std::vector<double> one{1}, ones{1, 1, 1}, mixed{1, 0};
    EXPECT_THROW(welch_t_test(one, mixed), ReportError);
    EXPECT_THROW(welch_t_test(ones, ones), ReportError);
    EXPECT_NO_THROW(welch_t_test(ones, mixed));
}

TEST(Moments, Basic) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto m = moments(v);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
}
