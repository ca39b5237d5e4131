#pragma once

// Time-series helpers: finite-difference derivatives and integer-ratio
// resampling with a linear-phase Kaiser-windowed FIR.
//
// Traces are stored time-major: one row per frame, one column per channel.

#include <vector>

#include "myoctl/types.hpp"

namespace myoctl {

enum class VelocityScheme {
    central,   // (q[t+1] - q[t-1]) / 2dt
    backward,  // (q[t] - q[t-1]) / dt, the velocity a semi-implicit Euler state carries
};

struct Derivatives {
    Eigen::MatrixXd qdot;
    Eigen::MatrixXd qddot;
};

/// Interior velocities per `scheme`; accelerations are central second
/// differences. Endpoints use second-order one-sided stencils. Needs >= 3
/// frames.
Derivatives differentiate(const Eigen::MatrixXd& q, double dt, VelocityScheme scheme = VelocityScheme::central);

struct FirDesign {
    int ratio = 4;
    int taps_per_phase = 64;
    double beta = 8.0;
    double cutoff_fraction = 0.8;  // of the low-rate Nyquist frequency
};

/// Odd-length (taps_per_phase * ratio + 1) low-pass prototype, unit DC gain.
std::vector<double> design_lowpass(const FirDesign& design);

/// Zero-phase decimation/interpolation by an integer ratio. Output length is
/// round(len * to_hz / from_hz). Edges are extended by odd reflection about
/// the end samples. Throws std::invalid_argument for non-integer ratios.
Eigen::VectorXd resample(const Eigen::VectorXd& trace, double from_hz, double to_hz);

/// Column-wise resample.
Eigen::MatrixXd resample(const Eigen::MatrixXd& traces, double from_hz, double to_hz);

}  // namespace myoctl
