#include <gtest/gtest.h>

#include <random>

#include "myoctl/inverse_ctrl.hpp"

using namespace myoctl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

InverseInputs<double> scalar_example() {
    InverseInputs<double> in;
    in.AM = MatrixXd::Constant(1, 1, 1.0);
    in.gain = VectorXd::Constant(1, -2.0);
    in.bias = VectorXd::Zero(1);
    in.act = VectorXd::Constant(1, 0.5);
    in.q_frc = VectorXd::Constant(1, -1.5);
    in.timestep = 0.002;
    in.tau1 = VectorXd::Zero(1);
    in.tau2 = VectorXd::Constant(1, 0.02);
    return in;
}

// One joint, two antagonists, q_frc produced by a known ctrl.
InverseInputs<double> antagonists(const VectorXd& ctrl_star) {
    InverseInputs<double> in;
    in.AM.resize(1, 2);
    in.AM << 0.012, -0.009;
    in.gain = VectorXd(2);
    in.gain << -150.0, -90.0;
    in.bias = VectorXd(2);
    in.bias << -3.0, -0.5;
    in.act = VectorXd(2);
    in.act << 0.3, 0.6;
    in.timestep = 0.002;
    const auto lin = tau_linearization(0.01, 0.04, 5.0);
    in.tau1 = VectorXd::Constant(2, lin.tau1);
    in.tau2 = VectorXd::Constant(2, lin.tau2);
    VectorXd x(2);
    for (Index i = 0; i < 2; ++i)
        x[i] = increment_from_ctrl(ctrl_star[i], in.act[i], in.gain[i], in.timestep, in.tau1[i], in.tau2[i]);
    in.q_frc = in.AM * (in.gain.cwiseProduct(in.act) + in.bias + x);
    return in;
}

}  // namespace

TEST(TauLinearization, Examples) {
    auto t = tau_linearization(0.02, 0.02, 0.1);
    EXPECT_EQ(t.tau1, 0.0);
    EXPECT_EQ(t.tau2, 0.02);
    t = tau_linearization(0.01, 0.04, 0.005);
    EXPECT_NEAR(t.tau2, 0.025, 1e-15);
    EXPECT_NEAR(t.tau1, -11.25, 1e-12);
    EXPECT_THROW(tau_linearization(0.01, 0.04, 0.0), ContractViolation);
}

TEST(BuildQp, ScalarExample) {
    const auto fp = build_qp(scalar_example());
    EXPECT_NEAR(fp.k[0], 0.5, 1e-15);
    EXPECT_NEAR(fp.qp.P(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(fp.qp.q[0], 1.0, 1e-15);
    EXPECT_NEAR(fp.qp.lb[0], -0.1, 1e-15);
    EXPECT_NEAR(fp.qp.ub[0], 0.1, 1e-15);
}

TEST(BuildQp, ZeroGainPinned) {
    auto in = antagonists(VectorXd::Constant(2, 0.5));
    in.gain[1] = 0.0;
    const auto fp = build_qp(in);
    EXPECT_EQ(fp.qp.lb[1], 0.0);
    EXPECT_EQ(fp.qp.ub[1], 0.0);
}

TEST(BuildQp, ForcesAlreadyMatch) {
    auto in = antagonists(VectorXd::Constant(2, 0.5));
    in.q_frc = in.AM * (in.gain.cwiseProduct(in.act) + in.bias);
    const auto fp = build_qp(in);
    EXPECT_LT(std::abs(fp.k[0]), 1e-15);
    EXPECT_LT(fp.qp.q.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildQp, VanishingDenominatorIsInfeasible) {
    auto in = scalar_example();
    in.act[0] = 0.0;
    in.tau1[0] = -0.02;  // (1 - act) * tau1 + tau2 == 0
    EXPECT_THROW(build_qp(in), InfeasibleFrame);
    const auto sol = invert_frame(in);
    EXPECT_FALSE(sol.feasible);
    EXPECT_FALSE(sol.reason.empty());
}

TEST(BuildQp, ContractViolations) {
    auto in = scalar_example();
    in.gain[0] = 1.0;
    EXPECT_THROW(build_qp(in), ContractViolation);
    in = scalar_example();
    in.act[0] = 1.2;
    EXPECT_THROW(build_qp(in), ContractViolation);
    in = scalar_example();
    in.tau2[0] = 0.0;
    EXPECT_THROW(build_qp(in), ContractViolation);
    in = scalar_example();
    in.q_frc = VectorXd::Zero(2);
    EXPECT_THROW(build_qp(in), ContractViolation);
}

TEST(RecoverCtrl, Examples) {
    const auto in = scalar_example();
    EXPECT_EQ(recover_ctrl(VectorXd(VectorXd::Zero(1)), in)[0], 0.5);
    EXPECT_NEAR(recover_ctrl(VectorXd(VectorXd::Constant(1, -0.1)), in)[0], 1.0, 1e-12);
    EXPECT_NEAR(recover_ctrl(VectorXd(VectorXd::Constant(1, 0.1)), in)[0], 0.0, 1e-12);
}

TEST(RecoverCtrl, BoundSaturation) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 10000; ++i) {
        const double act = u(rng), gain = -1 - 500 * u(rng), dt = 1e-3 + 1e-2 * u(rng);
        const double tau2 = 0.005 + 0.05 * u(rng);
        const double tau1 = (u(rng) - 0.5) * tau2;  // keeps both bound denominators positive
        const double lb = dt * gain * (1 - act) / ((1 - act) * tau1 + tau2);
        const double ub = dt * gain * (-act) / ((-act) * tau1 + tau2);
        EXPECT_NEAR(ctrl_from_increment(lb, act, gain, dt, tau1, tau2), 1.0, 1e-9);
        EXPECT_NEAR(ctrl_from_increment(ub, act, gain, dt, tau1, tau2), 0.0, 1e-9);
    }
}

TEST(RecoverCtrl, AlgebraicRoundTrip) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    int checked = 0;
    while (checked < 100000) {
        const double act = u(rng), ctrl = u(rng), gain = -1 - 500 * u(rng), dt = 1e-4 + 1e-2 * u(rng);
        const double tau2 = 0.005 + 0.05 * u(rng), tau1 = (u(rng) - 0.5) * 0.04;
        const double d1 = (ctrl - act) * tau1 + tau2;
        const double x = increment_from_ctrl(ctrl, act, gain, dt, tau1, tau2);
        if (std::abs(d1) < 1e-6 || std::abs(dt * gain - x * tau1) < 1e-6) continue;
        ASSERT_NEAR(ctrl_from_increment(x, act, gain, dt, tau1, tau2), ctrl, 1e-9);
        ++checked;
    }
}

TEST(RecoverCtrl, MonotoneInIncrement) {
    auto in = antagonists(VectorXd::Constant(2, 0.5));
    const auto fp = build_qp(in);
    for (Index i = 0; i < 2; ++i) {
        double prev = 2.0;
        for (int s = 0; s <= 200; ++s) {
            VectorXd x = VectorXd::Zero(2);
            x[i] = fp.qp.lb[i] + (fp.qp.ub[i] - fp.qp.lb[i]) * s / 200.0;
            const double c = recover_ctrl(x, in)[i];
            EXPECT_LE(c, prev + 1e-15);
            prev = c;
        }
    }
}

TEST(RecoverCtrl, ZeroGainKeepsActivation) {
    auto in = antagonists(VectorXd::Constant(2, 0.5));
    in.gain[0] = 0.0;
    EXPECT_EQ(recover_ctrl(VectorXd(VectorXd::Zero(2)), in)[0], in.act[0]);
}

TEST(InvertFrame, ScalarExample) {
    const auto sol = invert_frame(scalar_example());
    EXPECT_TRUE(sol.feasible);
    EXPECT_NEAR(sol.ctrl[0], 1.0, 1e-12);
    EXPECT_NEAR(sol.residual, 0.4, 1e-12);
}

TEST(InvertFrame, ForcesAlreadyMatch) {
    auto in = antagonists(VectorXd::Constant(2, 0.5));
    in.q_frc = in.AM * (in.gain.cwiseProduct(in.act) + in.bias);
    const auto sol = invert_frame(in);
    EXPECT_LT(sol.x.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((sol.ctrl - in.act).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(sol.residual, 1e-15);
}

TEST(InvertFrame, ReachableTargetSolved) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 200; ++i) {
        VectorXd c(2);
        c << u(rng), u(rng);
        const auto sol = invert_frame(antagonists(c));
        EXPECT_TRUE(sol.converged);
        EXPECT_LT(sol.residual, 1e-9);
        EXPECT_TRUE(((sol.ctrl.array() >= 0) && (sol.ctrl.array() <= 1)).all());
    }
}

TEST(InvertFrame, ResidualOptimalOverBox) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        InverseInputs<double> in;
        in.AM = MatrixXd(3, 6);
        for (Index r = 0; r < 3; ++r)
            for (Index c = 0; c < 6; ++c) in.AM(r, c) = 0.01 * g(rng);
        in.gain = -VectorXd::NullaryExpr(6, [&] { return 50 + 200 * u(rng); });
        in.bias = -VectorXd::NullaryExpr(6, [&] { return 2 * u(rng); });
        in.act = VectorXd::NullaryExpr(6, [&] { return u(rng); });
        in.q_frc = VectorXd::NullaryExpr(3, [&] { return 2 * g(rng); });  // often unreachable
        const auto lin = tau_linearization(0.01, 0.04, 5.0);
        in.tau1 = VectorXd::Constant(6, lin.tau1);
        in.tau2 = VectorXd::Constant(6, lin.tau2);
        const auto fp = build_qp(in);
        const auto sol = invert_frame(in);
        const double best = (in.AM * sol.x + fp.k).norm();
        for (int s = 0; s < 1000; ++s) {
            VectorXd x(6);
            for (Index i = 0; i < 6; ++i) x[i] = fp.qp.lb[i] + (fp.qp.ub[i] - fp.qp.lb[i]) * u(rng);
            EXPECT_GE((in.AM * x + fp.k).norm(), best - 1e-10);
        }
    }
}
