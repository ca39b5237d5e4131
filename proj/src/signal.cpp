#include "myoctl/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace myoctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Derivatives differentiate(const MatrixXd& q, double dt, VelocityScheme scheme) {
    const Index n = q.rows();
    if (n < 3) throw std::invalid_argument("differentiate: need at least 3 frames");
    if (!(dt > 0)) throw std::invalid_argument("differentiate: dt must be positive");
    Derivatives d{MatrixXd(n, q.cols()), MatrixXd(n, q.cols())};
    const double inv_dt2 = 1.0 / (dt * dt);

    for (Index t = 1; t + 1 < n; ++t) d.qddot.row(t) = (q.row(t + 1) - 2.0 * q.row(t) + q.row(t - 1)) * inv_dt2;
    d.qddot.row(0) = (q.row(0) - 2.0 * q.row(1) + q.row(2)) * inv_dt2;
    d.qddot.row(n - 1) = (q.row(n - 1) - 2.0 * q.row(n - 2) + q.row(n - 3)) * inv_dt2;

    if (scheme == VelocityScheme::central) {
        for (Index t = 1; t + 1 < n; ++t) d.qdot.row(t) = (q.row(t + 1) - q.row(t - 1)) / (2.0 * dt);
        d.qdot.row(0) = (-3.0 * q.row(0) + 4.0 * q.row(1) - q.row(2)) / (2.0 * dt);
        d.qdot.row(n - 1) = (3.0 * q.row(n - 1) - 4.0 * q.row(n - 2) + q.row(n - 3)) / (2.0 * dt);
    } else {
        for (Index t = 1; t < n; ++t) d.qdot.row(t) = (q.row(t) - q.row(t - 1)) / dt;
        d.qdot.row(0) = (q.row(1) - q.row(0)) / dt;
    }
    return d;
}

std::vector<double> design_lowpass(const FirDesign& design) {
    if (design.ratio < 1 || design.taps_per_phase < 1) throw std::invalid_argument("design_lowpass: bad design");
    const int len = design.taps_per_phase * design.ratio + 1;
    const double center = 0.5 * (len - 1);
    // Cutoff in cycles per high-rate sample.
    const double fc = design.cutoff_fraction * 0.5 / design.ratio;
    const double i0_beta = std::cyl_bessel_i(0.0, design.beta);
    std::vector<double> h(static_cast<std::size_t>(len));
    double sum = 0.0;
    for (int k = 0; k < len; ++k) {
        const double t = k - center;
        const double arg = 2.0 * fc * t;
        const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
        const double r = t / center;
        const double w = std::cyl_bessel_i(0.0, design.beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
        h[static_cast<std::size_t>(k)] = 2.0 * fc * sinc * w;
        sum += h[static_cast<std::size_t>(k)];
    }
    for (double& v : h) v /= sum;
    return h;
}

namespace {

int integer_ratio(double num, double den) {
    const double r = num / den;
    const double rounded = std::round(r);
    if (!(rounded >= 1.0) || std::abs(r - rounded) > 1e-9 * rounded)
        throw std::invalid_argument("resample: rates " + std::to_string(num) + " and " + std::to_string(den) +
                                    " are not related by an integer factor");
    return static_cast<int>(rounded);
}

// Odd (point-reflection) extension past either end: keeps value and slope
// continuous, so a moving trace does not appear to stop at the boundary.
double extended(const VectorXd& x, Index i) {
    const Index n = x.size();
    if (n == 1) return x[0];
    if (i < 0) return 2.0 * x[0] - x[std::min(-i, n - 1)];
    if (i >= n) return 2.0 * x[n - 1] - x[std::max<Index>(2 * (n - 1) - i, 0)];
    return x[i];
}

VectorXd decimate(const VectorXd& x, int ratio, const std::vector<double>& h) {
    const Index n = x.size();
    const Index m = static_cast<Index>(std::llround(static_cast<double>(n) / ratio));
    const Index len = static_cast<Index>(h.size());
    const Index center = (len - 1) / 2;
    VectorXd y(m);
    for (Index k = 0; k < m; ++k) {
        double acc = 0.0;
        for (Index t = 0; t < len; ++t) {
            acc += h[static_cast<std::size_t>(t)] * extended(x, k * ratio + t - center);
        }
        y[k] = acc;
    }
    return y;
}

VectorXd interpolate(const VectorXd& x, int ratio, const std::vector<double>& h) {
    const Index n = x.size();
    const Index m = n * ratio;
    const Index len = static_cast<Index>(h.size());
    const Index center = (len - 1) / 2;
    // Each output phase sees one polyphase branch; normalize every branch to
    // unit sum so constants pass through exactly.
    std::vector<double> branch_sum(static_cast<std::size_t>(ratio), 0.0);
    for (Index t = 0; t < len; ++t) branch_sum[static_cast<std::size_t>(t % ratio)] += h[static_cast<std::size_t>(t)];
    VectorXd y(m);
    for (Index k = 0; k < m; ++k) {
        // Taps t = k + center - i * ratio for input samples i.
        const Index phase = (k + center) % ratio;
        const double norm = branch_sum[static_cast<std::size_t>(phase)];
        double acc = 0.0;
        for (Index t = phase; t < len; t += ratio) {
            const Index i = (k + center - t) / ratio;
            acc += h[static_cast<std::size_t>(t)] * extended(x, i);
        }
        y[k] = acc / norm;
    }
    return y;
}

}  // namespace

VectorXd resample(const VectorXd& trace, double from_hz, double to_hz) {
    if (!(from_hz > 0 && to_hz > 0)) throw std::invalid_argument("resample: rates must be positive");
    if (trace.size() == 0) return trace;
    if (from_hz == to_hz) return trace;
    if (from_hz > to_hz) {
        const int r = integer_ratio(from_hz, to_hz);
        return decimate(trace, r, design_lowpass({.ratio = r}));
    }
    const int r = integer_ratio(to_hz, from_hz);
    return interpolate(trace, r, design_lowpass({.ratio = r}));
}

MatrixXd resample(const MatrixXd& traces, double from_hz, double to_hz) {
    if (traces.cols() == 0) {
        const VectorXd probe = VectorXd::Zero(traces.rows());
        return MatrixXd(resample(probe, from_hz, to_hz).size(), 0);
    }
    VectorXd first = resample(VectorXd(traces.col(0)), from_hz, to_hz);
    MatrixXd out(first.size(), traces.cols());
    out.col(0) = first;
    for (Index c = 1; c < traces.cols(); ++c) out.col(c) = resample(VectorXd(traces.col(c)), from_hz, to_hz);
    return out;
}

}  // namespace myoctl
