#include "myoctl/trajectory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "myoctl/random.hpp"

namespace myoctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Rollout simulate(const Plant& plant, const PlantState& initial, const MatrixXd& ctrl, double dt, TauModeKind mode) {
    const Index frames = ctrl.rows();
    if (frames < 1) throw std::invalid_argument("simulate: need at least one frame");
    if (ctrl.cols() != plant.nactuators()) throw ContractViolation("simulate: ctrl column count != nactuators");
    Rollout r{MatrixXd(frames, plant.njoints()), MatrixXd(frames, plant.njoints()),
              MatrixXd(frames, plant.nactuators())};
    PlantState s = initial;
    for (Index t = 0; t < frames; ++t) {
        r.q.row(t) = s.q.transpose();
        r.qdot.row(t) = s.qdot.transpose();
        r.act.row(t) = s.act.transpose();
        if (t + 1 < frames) s = forward_step(plant, s, ctrl.row(t).transpose(), dt, mode);
    }
    return r;
}

MatrixXd smooth_random_ctrl(Index frames, Index nactuators, double dt, std::uint64_t seed, double lo, double hi) {
    SplitMix64 rng(seed);
    MatrixXd c(frames, nactuators);
    const double mid = 0.5 * (lo + hi);
    const double amp = 0.5 * (hi - lo) / 3.0;
    for (Index i = 0; i < nactuators; ++i) {
        double freq[3], phase[3];
        for (int k = 0; k < 3; ++k) {
            freq[k] = rng.uniform(0.2, 2.0);
            phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
        for (Index t = 0; t < frames; ++t) {
            const double time = static_cast<double>(t) * dt;
            double v = mid;
            for (int k = 0; k < 3; ++k) v += amp * std::sin(2.0 * std::numbers::pi * freq[k] * time + phase[k]);
            c(t, i) = v;
        }
    }
    return c;
}

TrajectoryInversion invert_trajectory(const Plant& plant, const MatrixXd& q_traj, double rate_hz,
                                      const InversionOptions& opts) {
    const Index frames = q_traj.rows();
    const Index na = plant.nactuators();
    if (q_traj.cols() != plant.njoints()) throw ContractViolation("invert_trajectory: column count != njoints");
    if (frames < 3) throw std::invalid_argument("invert_trajectory: need at least 3 frames");
    if (!(rate_hz > 0)) throw std::invalid_argument("invert_trajectory: rate must be positive");

    TrajectoryInversion out;
    out.ctrl = MatrixXd::Zero(frames, na);
    out.act = MatrixXd::Zero(frames, na);
    out.residual = VectorXd::Zero(frames);

    for (Index t = 0; t < frames; ++t) {
        if (!q_traj.row(t).allFinite()) {
            out.ok = false;
            out.failing_frame = t;
            out.failure_reason = "non-finite joint angles at frame " + std::to_string(t);
            return out;
        }
    }

    const double dt = 1.0 / rate_hz;
    const auto deriv = differentiate(q_traj, dt, opts.velocity);
    out.qdot0 = deriv.qdot.row(0).transpose();

    VectorXd tau1(na), tau2(na);
    std::vector<TauMode<double>> modes;
    for (Index i = 0; i < na; ++i) {
        const auto& p = plant.muscles[static_cast<std::size_t>(i)].params;
        const auto lin = tau_linearization(p.tau_act, p.tau_deact, p.tau_smooth);
        tau1[i] = lin.tau1;
        tau2[i] = lin.tau2;
        modes.push_back(TauMode<double>::smooth(p.tau_smooth));
    }

    InverseInputs<double> inp;
    inp.AM = plant.moment_arms;
    inp.timestep = dt;
    inp.tau1 = tau1;
    inp.tau2 = tau2;
    VectorXd act = VectorXd::Zero(na);

    for (Index t = 0; t < frames; ++t) {
        const VectorXd q = q_traj.row(t).transpose();
        const VectorXd qdot = deriv.qdot.row(t).transpose();
        const VectorXd qddot = deriv.qddot.row(t).transpose();
        TendonState tendons;
        try {
            tendons = tendon_kinematics(plant, q, qdot);
        } catch (const PlantConfigError& e) {
            out.ok = false;
            out.failing_frame = t;
            out.failure_reason = "infeasible joint configuration at frame " + std::to_string(t) + ": " + e.what();
            return out;
        }
        const auto gb = actuator_gains(plant, tendons);
        inp.gain = gb.gain;
        inp.bias = gb.bias;
        inp.act = act;
        inp.q_frc = inverse_dynamics(plant, q, qdot, qddot);

        const auto sol = invert_frame(inp, opts.qp);
        out.act.row(t) = act.transpose();
        out.ctrl.row(t) = sol.ctrl.transpose();
        out.residual[t] = sol.residual;
        const double limit = opts.frame_residual_rel * std::max(1.0, inp.q_frc.cwiseAbs().maxCoeff());
        if (!sol.feasible || !(sol.residual <= limit)) {
            ++out.infeasible_frames;
            if (!out.failing_frame) out.failing_frame = t;
        }
        if (sol.feasible && !sol.converged) ++out.unconverged_frames;

        for (Index i = 0; i < na; ++i) {
            const auto& p = plant.muscles[static_cast<std::size_t>(i)].params;
            act[i] = step_activation(act[i], sol.ctrl[i], dt, p.tau_act, p.tau_deact, modes[static_cast<std::size_t>(i)]);
        }
    }

    const double fraction = static_cast<double>(out.infeasible_frames) / static_cast<double>(frames);
    if (fraction > opts.max_infeasible_fraction) {
        out.ok = false;
        out.failure_reason = std::to_string(out.infeasible_frames) + " of " + std::to_string(frames) +
                             " frames infeasible (first at frame " + std::to_string(*out.failing_frame) + ")";
    } else {
        out.failing_frame.reset();
    }
    return out;
}

RoundTripReport round_trip(const Plant& plant, double duration_s, double dt, std::uint64_t seed,
                           double residual_tol, const InversionOptions& opts) {
    const Index frames = static_cast<Index>(std::llround(duration_s / dt)) + 1;
    const MatrixXd ctrl = smooth_random_ctrl(frames, plant.nactuators(), dt, seed);
    const auto truth = simulate(plant, PlantState::rest(plant), ctrl, dt);

    const auto inv = invert_trajectory(plant, truth.q, 1.0 / dt, opts);

    PlantState start{truth.q.row(0).transpose(), inv.qdot0, VectorXd::Zero(plant.nactuators())};
    const auto replay = simulate(plant, start, inv.ctrl, dt);

    RoundTripReport rep;
    rep.frames = frames;
    rep.inversion_ok = inv.ok;
    rep.infeasible_frames = inv.infeasible_frames;
    rep.rmse = std::sqrt((replay.q - truth.q).squaredNorm() / static_cast<double>(truth.q.size()));
    Index small = 0;
    for (Index t = 0; t < frames; ++t) {
        const double r = inv.residual[t];
        if (std::isfinite(r)) rep.max_residual = std::max(rep.max_residual, r);
        if (r < residual_tol) ++small;
    }
    rep.fraction_small_residual = static_cast<double>(small) / static_cast<double>(frames);
    return rep;
}

}  // namespace myoctl
