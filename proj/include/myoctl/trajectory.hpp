#pragma once

// Whole-trajectory forward simulation and control recovery.

#include <cstdint>
#include <optional>
#include <string>

#include "myoctl/inverse_ctrl.hpp"
#include "myoctl/plant.hpp"
#include "myoctl/signal.hpp"

namespace myoctl {

struct Rollout {
    Eigen::MatrixXd q;     // frames x njoints
    Eigen::MatrixXd qdot;  // frames x njoints
    Eigen::MatrixXd act;   // frames x nactuators
};

/// Row 0 is `initial`; row t+1 is forward_step(row t, ctrl row t). The last
/// control row is not applied.
Rollout simulate(const Plant& plant, const PlantState& initial, const Eigen::MatrixXd& ctrl, double dt,
                 TauModeKind mode = TauModeKind::smooth);

/// Seeded, smooth control signals in [lo, hi]: per muscle, a sum of three
/// sinusoids (0.2 to 2 Hz) with random phases.
Eigen::MatrixXd smooth_random_ctrl(Index frames, Index nactuators, double dt, std::uint64_t seed, double lo = 0.1,
                                   double hi = 0.9);

struct InversionOptions {
    QpOptions<double> qp{};
    // A frame is infeasible when |AM x + k|_inf > frame_residual_rel * max(1, |q_frc|_inf).
    double frame_residual_rel = 1e-3;
    // More than this fraction of infeasible frames fails the trajectory.
    double max_infeasible_fraction = 0.01;
    VelocityScheme velocity = VelocityScheme::central;
};

struct TrajectoryInversion {
    Eigen::MatrixXd ctrl;      // frames x nactuators
    Eigen::MatrixXd act;       // activation entering each frame
    Eigen::VectorXd residual;  // |AM x + k|_inf per frame
    Eigen::VectorXd qdot0;     // velocity estimate at frame 0
    Index infeasible_frames = 0;
    Index unconverged_frames = 0;
    bool ok = true;
    std::string failure_reason;
    std::optional<Index> failing_frame;
};

/// Recover controls for a joint-angle trajectory sampled at rate_hz. Frames
/// are processed in order; activation starts at zero and is advanced with the
/// recovered control through the smoothed activation dynamics.
TrajectoryInversion invert_trajectory(const Plant& plant, const Eigen::MatrixXd& q_traj, double rate_hz,
                                      const InversionOptions& opts = {});

struct RoundTripReport {
    double rmse = 0.0;          // rad, over all frames and joints
    double max_residual = 0.0;  // over feasible frames
    double fraction_small_residual = 0.0;  // frames with residual < residual_tol
    Index frames = 0;
    Index infeasible_frames = 0;
    bool inversion_ok = false;
};

/// simulate -> invert -> re-simulate -> compare.
RoundTripReport round_trip(const Plant& plant, double duration_s, double dt, std::uint64_t seed,
                           double residual_tol = 1e-6, const InversionOptions& opts = {});

}  // namespace myoctl
