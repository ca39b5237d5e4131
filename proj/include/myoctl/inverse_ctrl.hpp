#pragma once

// Per-frame recovery of muscle controls from a desired joint force.
//
// The required activation change over one explicit Euler step is written as
//
//   x_i = dt * gain_i * d_i / (d_i * tau1_i + tau2_i),   d_i = ctrl_i - act_i,
//
// with tau(d) ~= tau2 + tau1 * d the first-order model of the smoothed time
// constant about d = 0. The joint-force balance becomes AM x + k = 0, which is
// solved in the least-squares sense over the box that ctrl in [0, 1] maps to.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "myoctl/errors.hpp"
#include "myoctl/qp.hpp"
#include "myoctl/types.hpp"

namespace myoctl {

template <typename Scalar = double>
struct TauLinearization {
    Scalar tau1;  // slope of tau in (ctrl - act)
    Scalar tau2;  // tau at ctrl == act
};

/// First-order expansion of the smoothed time constant at ctrl == act; the
/// smoothstep slope at the midpoint is 15/8.
template <typename Scalar>
TauLinearization<Scalar> tau_linearization(Scalar tau_act, Scalar tau_deact, Scalar tau_smooth) {
    if (!(tau_smooth > 0))
        throw ContractViolation(
            "tau_linearization: tau_smooth must be positive; the hard-switch time constant has no linear model, "
            "use hard mode only for forward simulation");
    return {Scalar(15) / Scalar(8) * (tau_act - tau_deact) / tau_smooth, Scalar(0.5) * (tau_act + tau_deact)};
}

template <typename Scalar = double>
struct InverseInputs {
    MatrixX<Scalar> AM;  // njoints x nactuators
    VectorX<Scalar> gain;
    VectorX<Scalar> bias;
    VectorX<Scalar> act;
    VectorX<Scalar> q_frc;
    Scalar timestep = Scalar(0.002);
    VectorX<Scalar> tau1;
    VectorX<Scalar> tau2;

    Index nactuators() const { return AM.cols(); }

    void validate() const {
        const Index na = AM.cols();
        if (gain.size() != na || bias.size() != na || act.size() != na || tau1.size() != na || tau2.size() != na ||
            q_frc.size() != AM.rows())
            throw ContractViolation("InverseInputs: inconsistent dimensions");
        if (!(timestep > 0)) throw ContractViolation("InverseInputs: timestep must be positive");
        if (!((tau2.array() > 0).all())) throw ContractViolation("InverseInputs: tau2 must be positive");
        if (!((act.array() >= 0).all() && (act.array() <= 1).all()))
            throw ContractViolation("InverseInputs: act outside [0, 1]");
        if (!((gain.array() <= 0).all())) throw ContractViolation("InverseInputs: gain must be non-positive");
    }
};

template <typename Scalar = double>
struct FrameProblem {
    BoxQp<Scalar> qp;
    VectorX<Scalar> k;
};

template <typename Scalar = double>
struct FrameSolution {
    VectorX<Scalar> ctrl;
    VectorX<Scalar> x;
    Scalar residual = Scalar(0);  // |AM x + k|_inf
    bool converged = false;
    bool feasible = true;
    std::string reason;  // set when !feasible
    QpDiagnostics<Scalar> qp;
};

inline constexpr double kZeroGain = 1e-12;
inline constexpr double kBoundDenominatorEps = 1e-12;
inline constexpr double kRecoverDenominatorEps = 1e-14;

/// Activation increment x for a given control (the forward map).
template <typename Scalar>
Scalar increment_from_ctrl(Scalar ctrl, Scalar act, Scalar gain, Scalar dt, Scalar tau1, Scalar tau2) {
    const Scalar d = ctrl - act;
    return dt * gain * d / (d * tau1 + tau2);
}

/// Control for a given activation increment, unclamped (inverse of the above).
template <typename Scalar>
Scalar ctrl_from_increment(Scalar x, Scalar act, Scalar gain, Scalar dt, Scalar tau1, Scalar tau2) {
    return act + x * tau2 / (dt * gain - x * tau1);
}

template <typename Scalar>
FrameProblem<Scalar> build_qp(const InverseInputs<Scalar>& inp) {
    inp.validate();
    const Index na = inp.nactuators();
    FrameProblem<Scalar> fp;
    fp.k = inp.AM * inp.gain.cwiseProduct(inp.act) + inp.AM * inp.bias - inp.q_frc;
    fp.qp.P = Scalar(2) * inp.AM.transpose() * inp.AM;
    fp.qp.q = Scalar(2) * inp.AM.transpose() * fp.k;
    fp.qp.lb.resize(na);
    fp.qp.ub.resize(na);
    for (Index i = 0; i < na; ++i) {
        if (std::abs(inp.gain[i]) < Scalar(kZeroGain)) {
            fp.qp.lb[i] = fp.qp.ub[i] = Scalar(0);
            continue;
        }
        const Scalar up = 1 - inp.act[i];
        const Scalar down = -inp.act[i];
        const Scalar den_lb = up * inp.tau1[i] + inp.tau2[i];
        const Scalar den_ub = down * inp.tau1[i] + inp.tau2[i];
        if (std::abs(den_lb) < Scalar(kBoundDenominatorEps) || std::abs(den_ub) < Scalar(kBoundDenominatorEps))
            throw InfeasibleFrame("build_qp: vanishing bound denominator for actuator " + std::to_string(i));
        fp.qp.lb[i] = inp.timestep * inp.gain[i] * up / den_lb;
        fp.qp.ub[i] = inp.timestep * inp.gain[i] * down / den_ub;
        if (!(fp.qp.lb[i] <= fp.qp.ub[i]))
            throw InfeasibleFrame("build_qp: lb > ub for actuator " + std::to_string(i) +
                                  " (linearized time constant changes sign)");
    }
    // Symmetrize exactly; AM' AM can differ from its transpose in the last bit.
    fp.qp.P = (Scalar(0.5) * (fp.qp.P + fp.qp.P.transpose())).eval();
    return fp;
}

template <typename Scalar>
VectorX<Scalar> recover_ctrl(const VectorX<Scalar>& x, const InverseInputs<Scalar>& inp) {
    const Index na = inp.nactuators();
    if (x.size() != na) throw ContractViolation("recover_ctrl: dimension mismatch");
    VectorX<Scalar> ctrl(na);
    for (Index i = 0; i < na; ++i) {
        if (std::abs(inp.gain[i]) < Scalar(kZeroGain)) {
            ctrl[i] = inp.act[i];
            continue;
        }
        const Scalar den = inp.timestep * inp.gain[i] - x[i] * inp.tau1[i];
        if (std::abs(den) < Scalar(kRecoverDenominatorEps))
            throw InfeasibleFrame("recover_ctrl: vanishing denominator for actuator " + std::to_string(i));
        ctrl[i] = std::clamp(inp.act[i] + x[i] * inp.tau2[i] / den, Scalar(0), Scalar(1));
    }
    return ctrl;
}

template <typename Scalar>
FrameSolution<Scalar> invert_frame(const InverseInputs<Scalar>& inp, const QpOptions<Scalar>& opts = {}) {
    FrameSolution<Scalar> sol;
    try {
        const auto fp = build_qp(inp);
        auto qs = solve_box_qp(fp.qp, opts);
        sol.ctrl = recover_ctrl(qs.x, inp);
        sol.residual = inp.AM.rows() > 0 ? (inp.AM * qs.x + fp.k).cwiseAbs().maxCoeff() : Scalar(0);
        sol.x = std::move(qs.x);
        sol.converged = qs.diag.converged;
        sol.qp = std::move(qs.diag);
    } catch (const InfeasibleFrame& e) {
        sol.feasible = false;
        sol.converged = false;
        sol.reason = e.what();
        sol.ctrl = inp.act;
        sol.x = VectorX<Scalar>::Zero(inp.nactuators());
        sol.residual = std::numeric_limits<Scalar>::infinity();
    }
    return sol;
}

}  // namespace myoctl
