#include <gtest/gtest.h>

#include <random>

#include "myoctl/activation.hpp"

using namespace myoctl;

namespace {

constexpr double kTa = 0.01;
constexpr double kTd = 0.04;

double fd(double x, double h = 1e-6) { return (smoothstep(x + h) - smoothstep(x - h)) / (2 * h); }

}  // namespace

TEST(Smoothstep, Examples) {
    EXPECT_EQ(smoothstep(-0.3), 0.0);
    EXPECT_EQ(smoothstep(1.7), 1.0);
    EXPECT_EQ(smoothstep(0.5), 0.5);
}

TEST(Smoothstep, FlatAtEnds) {
    EXPECT_LT(std::abs(fd(0.0)), 1e-6);
    EXPECT_LT(std::abs(fd(1.0)), 1e-6);
    EXPECT_NEAR(fd(0.5, 1e-5), 15.0 / 8.0, 1e-9);
}

TEST(TimeConstant, Hard) {
    const auto m = TauMode<double>::hard();
    EXPECT_DOUBLE_EQ(time_constant(1.0, 0.0, kTa, kTd, m), 0.5 * kTa);
    EXPECT_DOUBLE_EQ(time_constant(0.0, 1.0, kTa, kTd, m), 2.0 * kTd);
    // ctrl == act takes the deactivation branch
    EXPECT_DOUBLE_EQ(time_constant(0.3, 0.3, kTa, kTd, m), kTd * (0.5 + 1.5 * 0.3));
}

TEST(TimeConstant, SmoothMidpointExact) {
    for (double w : {0.005, 0.1, 5.0}) {
        const auto m = TauMode<double>::smooth(w);
        for (double a : {0.0, 0.17, 0.5, 1.0}) EXPECT_EQ(time_constant(a, a, kTa, kTd, m), 0.5 * (kTa + kTd));
    }
}

TEST(TimeConstant, SmoothLimitIsStep) {
    for (double d : {-0.4, -0.05, 0.05, 0.4}) {
        double prev_err = 1.0;
        for (double w : {1.0, 0.1, 0.01, 1e-4}) {
            const double tau = time_constant(0.5 + d, 0.5, kTa, kTd, TauMode<double>::smooth(w));
            const double err = std::abs(tau - (d > 0 ? kTa : kTd));
            EXPECT_LE(err, prev_err + 1e-15);
            prev_err = err;
        }
        EXPECT_LT(prev_err, 1e-12);
    }
}

TEST(TimeConstant, SmoothRequiresPositiveWidth) {
    EXPECT_THROW(TauMode<double>::smooth(0.0), ContractViolation);
    EXPECT_THROW(TauMode<double>::smooth(-1.0), ContractViolation);
}

TEST(StepActivation, Examples) {
    const auto hard = TauMode<double>::hard();
    const auto smooth = TauMode<double>::smooth(5.0);
    EXPECT_EQ(step_activation(0.3, 0.3, 0.002, kTa, kTd, smooth), 0.3);
    EXPECT_EQ(step_activation(0.3, 0.3, 0.002, kTa, kTd, hard), 0.3);
    EXPECT_NEAR(step_activation(0.0, 1.0, 0.002, kTa, kTd, hard), 0.4, 1e-15);
    EXPECT_EQ(step_activation(0.0, 1.0, 1e3, kTa, kTd, hard), 1.0);
    EXPECT_EQ(step_activation(1.0, 0.0, 1e3, kTa, kTd, smooth), 0.0);
    EXPECT_THROW(step_activation(0.0, 1.0, 0.0, kTa, kTd, hard), ContractViolation);
}

TEST(StepActivation, MonotoneTowardConstantCtrl) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    const double dt = 0.002;
    for (int trial = 0; trial < 500; ++trial) {
        const double ctrl = u(rng);
        double act = u(rng);
        const auto mode = trial % 2 ? TauMode<double>::hard() : TauMode<double>::smooth(0.005 + u(rng));
        for (int k = 0; k < 400; ++k) {
            const double next = step_activation(act, ctrl, dt, kTa, kTd, mode);
            ASSERT_GE(next, 0.0);
            ASSERT_LE(next, 1.0);
            ASSERT_LE(std::abs(next - ctrl), std::abs(act - ctrl));
            ASSERT_TRUE(act <= ctrl ? next <= ctrl : next >= ctrl);  // no overshoot
            act = next;
        }
        EXPECT_EQ(step_activation(ctrl, ctrl, dt, kTa, kTd, mode), ctrl);
    }
}
