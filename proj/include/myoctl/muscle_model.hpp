#pragma once

// Muscle-tendon geometry calibration and the force-length-velocity model.
//
// A muscle actuator is a tendon (inelastic, slack length LT) in series with a
// contractile element whose normalized length and velocity are
//
//   L = (actuator_length - LT) / L0,   V = actuator_velocity / L0.
//
// The generated force is -(FL(L) * FV(V) * act + FP(L)) * F0, which we split
// into an activation gain and an activation-independent bias so that
// force = gain * act + bias with gain, bias <= 0.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "myoctl/errors.hpp"

namespace myoctl {

template <typename Scalar = double>
struct MuscleParams {
    Scalar range_lo = Scalar(0.75);  // normalized length at op_len_min
    Scalar range_hi = Scalar(1.05);  // normalized length at op_len_max
    Scalar lmin = Scalar(0.5);
    Scalar lmax = Scalar(1.6);
    Scalar vmax = Scalar(1.5);
    Scalar fpmax = Scalar(1.3);
    Scalar fvmax = Scalar(1.2);
    Scalar scale = Scalar(200);
    Scalar force_override = Scalar(-1);  // <= 0 selects scale / acc0
    Scalar tau_act = Scalar(0.01);
    Scalar tau_deact = Scalar(0.04);
    // Width of the activation/deactivation blend. Must exceed
    // 15/8 * |tau_act - tau_deact| / tau_avg for the inverse solver's
    // linearized time constant to stay positive over ctrl - act in [-1, 1].
    Scalar tau_smooth = Scalar(5);

    void validate() const {
        auto fail = [](const char* what) { throw ContractViolation(std::string("MuscleParams: ") + what); };
        if (!(range_lo > 0 && range_lo < range_hi)) fail("require 0 < range_lo < range_hi");
        if (!(lmin < 1 && 1 < lmax)) fail("require lmin < 1 < lmax");
        if (!(vmax > 0)) fail("require vmax > 0");
        if (!(fpmax >= 0)) fail("require fpmax >= 0");
        if (!(fvmax >= 1)) fail("require fvmax >= 1");
        if (!(scale > 0)) fail("require scale > 0");
        if (!(tau_act > 0 && tau_deact > 0)) fail("require positive activation time constants");
        if (!(tau_smooth >= 0)) fail("require tau_smooth >= 0");
    }
};

template <typename Scalar = double>
struct MuscleGeometry {
    Scalar L0 = Scalar(1);  // optimal muscle length (m)
    Scalar LT = Scalar(0);  // tendon slack length (m)
    Scalar F0 = Scalar(1);  // peak isometric force (N)

    void validate() const {
        if (!(L0 > 0 && LT >= 0 && F0 > 0))
            throw ContractViolation("MuscleGeometry: require L0 > 0, LT >= 0, F0 > 0");
    }
};

template <typename Scalar>
struct NormalizedState {
    Scalar L;
    Scalar V;
};

template <typename Scalar>
struct FlvCurves {
    Scalar fl;
    Scalar fv;
    Scalar fp;
};

template <typename Scalar>
struct GainBias {
    Scalar gain;
    Scalar bias;
};

/// Solve LT + range_lo * L0 = op_len_min, LT + range_hi * L0 = op_len_max for
/// (L0, LT) and pick F0 from the override or from scale / acc0.
template <typename Scalar>
MuscleGeometry<Scalar> calibrate_geometry(Scalar op_len_min, Scalar op_len_max, const MuscleParams<Scalar>& params,
                                          Scalar acc0, std::string_view actuator = "actuator") {
    const std::string name(actuator);
    if (!(op_len_min < op_len_max))
        throw CalibrationError(name + ": operating length range is empty (op_len_min >= op_len_max)");
    MuscleGeometry<Scalar> g;
    g.L0 = (op_len_max - op_len_min) / (params.range_hi - params.range_lo);
    g.LT = op_len_min - params.range_lo * g.L0;
    if (!(g.L0 > 0)) throw CalibrationError(name + ": non-positive optimal length L0");
    if (g.LT < 0) throw CalibrationError(name + ": negative tendon slack length LT");
    if (params.force_override > 0) {
        g.F0 = params.force_override;
    } else {
        if (!(acc0 > 0))
            throw CalibrationError(name + ": zero transmission (acc0 <= 0) requires force_override > 0");
        g.F0 = params.scale / acc0;
    }
    return g;
}

template <typename Scalar>
NormalizedState<Scalar> normalized_state(Scalar actuator_length, Scalar actuator_velocity,
                                         const MuscleGeometry<Scalar>& geom) {
    return {(actuator_length - geom.LT) / geom.L0, actuator_velocity / geom.L0};
}

/// Active force-length curve: a piecewise-quadratic bump that is zero outside
/// [lmin, lmax] and peaks at 1 for L = 1.
template <typename Scalar>
Scalar active_force_length(Scalar L, const MuscleParams<Scalar>& p) {
    if (L <= p.lmin || L >= p.lmax) return Scalar(0);
    const Scalar a = Scalar(0.5) * (p.lmin + 1);
    const Scalar b = Scalar(0.5) * (1 + p.lmax);
    if (L <= a) {
        const Scalar x = (L - p.lmin) / (a - p.lmin);
        return Scalar(0.5) * x * x;
    }
    if (L <= 1) {
        const Scalar x = (1 - L) / (1 - a);
        return 1 - Scalar(0.5) * x * x;
    }
    if (L <= b) {
        const Scalar x = (L - 1) / (b - 1);
        return 1 - Scalar(0.5) * x * x;
    }
    const Scalar x = (p.lmax - L) / (p.lmax - b);
    return Scalar(0.5) * x * x;
}

/// Force-velocity curve. Zero at the maximal shortening velocity -vmax, 1 at
/// V = 0, saturating at fvmax for lengthening faster than vmax * (fvmax - 1).
template <typename Scalar>
Scalar force_velocity(Scalar V, const MuscleParams<Scalar>& p) {
    const Scalar v = V / p.vmax;
    const Scalar y = p.fvmax - 1;
    if (v <= -1) return Scalar(0);
    if (v <= 0) return (v + 1) * (v + 1);
    if (v < y) return p.fvmax - (y - v) * (y - v) / y;
    return p.fvmax;
}

/// Passive force-length curve: cubic onset above L = 1, linear beyond the
/// midpoint b = (1 + lmax) / 2, reaching fpmax at lmax.
template <typename Scalar>
Scalar passive_force(Scalar L, const MuscleParams<Scalar>& p) {
    if (L <= 1) return Scalar(0);
    const Scalar b = Scalar(0.5) * (1 + p.lmax);
    if (L <= b) {
        const Scalar t = (L - 1) / (b - 1);
        return Scalar(0.25) * p.fpmax * t * t * t;
    }
    const Scalar t = (L - b) / (b - 1);
    return Scalar(0.25) * p.fpmax * (1 + 3 * t);
}

template <typename Scalar>
FlvCurves<Scalar> flv_curves(Scalar L, Scalar V, const MuscleParams<Scalar>& p) {
    return {active_force_length(L, p), force_velocity(V, p), passive_force(L, p)};
}

template <typename Scalar>
GainBias<Scalar> gain_bias(Scalar L, Scalar V, const MuscleGeometry<Scalar>& geom, const MuscleParams<Scalar>& p) {
    const auto c = flv_curves(L, V, p);
    return {-geom.F0 * c.fl * c.fv, -geom.F0 * c.fp};
}

template <typename Scalar>
Scalar actuator_force(Scalar L, Scalar V, Scalar act, const MuscleGeometry<Scalar>& geom,
                      const MuscleParams<Scalar>& p) {
    if (!(act >= 0 && act <= 1)) throw ContractViolation("actuator_force: activation outside [0, 1]");
    const auto gb = gain_bias(L, V, geom, p);
    return gb.gain * act + gb.bias;
}

}  // namespace myoctl
