#pragma once

// First-order activation dynamics: d(act)/dt = (ctrl - act) / tau(ctrl, act).

#include <algorithm>

#include "myoctl/errors.hpp"

namespace myoctl {

enum class TauModeKind { hard, smooth };

template <typename Scalar = double>
struct TauMode {
    TauModeKind kind = TauModeKind::smooth;
    Scalar tau_smooth = Scalar(0);

    static TauMode hard() { return {TauModeKind::hard, Scalar(0)}; }
    static TauMode smooth(Scalar width) {
        if (!(width > 0)) throw ContractViolation("TauMode::smooth requires tau_smooth > 0");
        return {TauModeKind::smooth, width};
    }
};

/// Quintic smoothstep 6x^5 - 15x^4 + 10x^3, clamped to [0, 1].
template <typename Scalar>
Scalar smoothstep(Scalar x) {
    if (x <= 0) return Scalar(0);
    if (x >= 1) return Scalar(1);
    return x * x * x * (x * (x * 6 - 15) + 10);
}

template <typename Scalar>
Scalar time_constant(Scalar ctrl, Scalar act, Scalar tau_act, Scalar tau_deact, const TauMode<Scalar>& mode) {
    const Scalar d = ctrl - act;
    if (mode.kind == TauModeKind::hard) {
        const Scalar f = Scalar(0.5) + Scalar(1.5) * act;
        return (d > 0 ? tau_act : tau_deact) * f;
    }
    // tau_deact + (tau_act - tau_deact) * s, rewritten about the midpoint so
    // that ctrl == act yields the mean of the two constants exactly.
    const Scalar s = smoothstep(d / mode.tau_smooth + Scalar(0.5));
    return Scalar(0.5) * (tau_act + tau_deact) + (tau_act - tau_deact) * (s - Scalar(0.5));
}

/// One explicit Euler step of the activation filter, clamped to [0, 1].
template <typename Scalar>
Scalar step_activation(Scalar act, Scalar ctrl, Scalar dt, Scalar tau_act, Scalar tau_deact,
                       const TauMode<Scalar>& mode) {
    if (!(dt > 0)) throw ContractViolation("step_activation: dt must be positive");
    const Scalar tau = time_constant(ctrl, act, tau_act, tau_deact, mode);
    return std::clamp(act + dt * (ctrl - act) / tau, Scalar(0), Scalar(1));
}

}  // namespace myoctl
