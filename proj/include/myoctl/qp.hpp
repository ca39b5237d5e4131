#pragma once

// Box-constrained convex quadratic programs
//
//   minimize   1/2 x' P x + q' x
//   subject to lb <= x <= ub
//
// solved by projected gradient with a fixed step 1 / lambda_max(P). After each
// projected step the variables strictly inside their bounds are refined by a
// minimum-norm Newton step on that face, truncated to stay feasible; the
// refinement only ever lowers the objective, so the iteration stays monotone.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "myoctl/types.hpp"

namespace myoctl {

class QpInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <typename Scalar = double>
struct BoxQp {
    MatrixX<Scalar> P;
    VectorX<Scalar> q;
    VectorX<Scalar> lb;
    VectorX<Scalar> ub;

    Index size() const { return q.size(); }
};

template <typename Scalar = double>
struct QpOptions {
    Scalar tol = Scalar(1e-10);
    int max_iter = 20000;
    // Add 1e-12 to the diagonal when P is numerically singular.
    bool regularize_singular = true;
    bool record_history = false;
};

template <typename Scalar = double>
struct QpDiagnostics {
    int iterations = 0;
    bool converged = false;
    bool regularized = false;
    Scalar objective = Scalar(0);
    Scalar kkt = Scalar(0);
    std::vector<Scalar> history;  // objective after each iteration, if requested
};

template <typename Scalar = double>
struct QpSolution {
    VectorX<Scalar> x;
    QpDiagnostics<Scalar> diag;
};

template <typename Scalar>
void validate(const BoxQp<Scalar>& problem) {
    const Index n = problem.size();
    if (problem.P.rows() != n || problem.P.cols() != n || problem.lb.size() != n || problem.ub.size() != n)
        throw QpInputError("BoxQp: inconsistent dimensions");
    if (!problem.P.allFinite() || !problem.q.allFinite() || !problem.lb.allFinite() || !problem.ub.allFinite())
        throw QpInputError("BoxQp: non-finite entries");
    if (n > 0 && (problem.P - problem.P.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12))
        throw QpInputError("BoxQp: P is not symmetric");
    if ((problem.lb.array() > problem.ub.array()).any()) throw QpInputError("BoxQp: lb > ub");
}

template <typename Scalar, typename Derived>
Scalar objective(const BoxQp<Scalar>& problem, const Eigen::MatrixBase<Derived>& x) {
    return Scalar(0.5) * x.dot(problem.P * x) + problem.q.dot(x);
}

template <typename Derived, typename DerivedLo, typename DerivedHi>
auto clip(const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<DerivedLo>& lo,
          const Eigen::MatrixBase<DerivedHi>& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

/// Infinity norm of x - clip(x - (P x + q)); zero exactly at a minimizer.
template <typename Scalar, typename Derived>
Scalar kkt_residual(const BoxQp<Scalar>& problem, const Eigen::MatrixBase<Derived>& x) {
    if (problem.size() == 0) return Scalar(0);
    const VectorX<Scalar> g = problem.P * x + problem.q;
    const VectorX<Scalar> projected = clip(x - g, problem.lb, problem.ub);
    return (x - projected).cwiseAbs().maxCoeff();
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
template <typename Scalar>
Scalar lambda_max(const MatrixX<Scalar>& P, int iterations = 100) {
    const Index n = P.rows();
    if (n == 0) return Scalar(0);
    VectorX<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v[i] = Scalar(1) + Scalar(i) / Scalar(2 * n);
    v.normalize();
    Scalar lambda = Scalar(0);
    for (int k = 0; k < iterations; ++k) {
        VectorX<Scalar> w = P * v;
        const Scalar nw = w.norm();
        if (!(nw > 0)) return Scalar(0);
        lambda = v.dot(w);
        v = w / nw;
    }
    return std::max(lambda, v.dot(P * v));
}

namespace detail {

template <typename Scalar>
struct ReducedResult {
    VectorX<Scalar> x;
    int iterations = 0;
    bool converged = false;
    bool regularized = false;
};

template <typename Scalar>
ReducedResult<Scalar> solve_reduced(const MatrixX<Scalar>& P, const VectorX<Scalar>& q, const VectorX<Scalar>& lb,
                                    const VectorX<Scalar>& ub, VectorX<Scalar> x, const QpOptions<Scalar>& opts,
                                    std::vector<Scalar>* history) {
    const Index m = q.size();
    ReducedResult<Scalar> out;
    MatrixX<Scalar> W = P;
    if (opts.regularize_singular) {
        Eigen::LDLT<MatrixX<Scalar>> ldlt(P);
        const Scalar scale = std::max(Scalar(1), P.diagonal().cwiseAbs().maxCoeff());
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
            ldlt.vectorD().minCoeff() <= Scalar(1e-12) * scale) {
            W.diagonal().array() += Scalar(1e-12);
            out.regularized = true;
        }
    }
    Scalar step = Scalar(1) / std::max(lambda_max(W), Scalar(1e-12));

    auto work_obj = [&](const VectorX<Scalar>& v) { return Scalar(0.5) * v.dot(W * v) + q.dot(v); };
    auto residual = [&](const VectorX<Scalar>& v) {
        const VectorX<Scalar> g = P * v + q;
        return (v - clip(v - g, lb, ub)).cwiseAbs().maxCoeff();
    };
    const Scalar slack = Scalar(8) * std::numeric_limits<Scalar>::epsilon();

    x = clip(x, lb, ub);
    Scalar f = work_obj(x);
    int stalled = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (residual(x) <= opts.tol) {
            out.converged = true;
            break;
        }
        out.iterations = it + 1;
        const VectorX<Scalar> g = W * x + q;

        VectorX<Scalar> xn = clip(x - step * g, lb, ub);
        Scalar fn = work_obj(xn);
        // Power iteration can underestimate lambda_max; back off the step.
        for (int k = 0; k < 60 && fn > f + slack * (std::abs(f) + 1); ++k) {
            step *= Scalar(0.5);
            xn = clip(x - step * g, lb, ub);
            fn = work_obj(xn);
        }
        if (fn > f) {
            xn = x;
            fn = f;
        }

        // Newton refinement on the free face.
        std::vector<Index> face;
        for (Index i = 0; i < m; ++i)
            if (xn[i] > lb[i] && xn[i] < ub[i]) face.push_back(i);
        if (!face.empty()) {
            const VectorX<Scalar> gn = W * xn + q;
            const MatrixX<Scalar> Pf = W(face, face);
            const VectorX<Scalar> gf = gn(face);
            const VectorX<Scalar> d = Pf.completeOrthogonalDecomposition().solve(-gf);
            Scalar alpha = Scalar(1);
            for (std::size_t j = 0; j < face.size(); ++j) {
                const Index i = face[j];
                if (d[j] > 0) alpha = std::min(alpha, (ub[i] - xn[i]) / d[j]);
                else if (d[j] < 0) alpha = std::min(alpha, (lb[i] - xn[i]) / d[j]);
            }
            if (d.allFinite() && alpha > 0) {
                VectorX<Scalar> xt = xn;
                for (std::size_t j = 0; j < face.size(); ++j) xt[face[j]] += alpha * d[j];
                xt = clip(xt, lb, ub);
                const Scalar ft = work_obj(xt);
                if (ft <= fn) {
                    xn = xt;
                    fn = ft;
                }
            }
        }

        stalled = (xn == x) ? stalled + 1 : 0;
        x = xn;
        f = fn;
        if (history) history->push_back(f);
        if (stalled >= 3) break;
    }
    if (!out.converged) out.converged = residual(x) <= opts.tol;
    out.x = std::move(x);
    return out;
}

}  // namespace detail

/// Solve a box QP. Variables with lb_i == ub_i are fixed and eliminated.
/// Non-convergence is reported through diag.converged with the best iterate.
template <typename Scalar>
QpSolution<Scalar> solve_box_qp(const BoxQp<Scalar>& problem, const QpOptions<Scalar>& opts = {},
                                const VectorX<Scalar>* x0 = nullptr) {
    validate(problem);
    if (!(opts.tol > 0)) throw QpInputError("solve_box_qp: tol must be positive");
    const Index n = problem.size();
    if (x0 && (x0->size() != n || !x0->allFinite())) throw QpInputError("solve_box_qp: bad initial point");

    std::vector<Index> free_idx;
    std::vector<Index> fixed_idx;
    for (Index i = 0; i < n; ++i) (problem.lb[i] == problem.ub[i] ? fixed_idx : free_idx).push_back(i);

    QpSolution<Scalar> sol;
    sol.x = x0 ? clip(*x0, problem.lb, problem.ub).eval() : clip(VectorX<Scalar>::Zero(n), problem.lb, problem.ub).eval();
    for (Index i : fixed_idx) sol.x[i] = problem.lb[i];

    if (!free_idx.empty()) {
        const MatrixX<Scalar> P = problem.P(free_idx, free_idx);
        VectorX<Scalar> q = problem.q(free_idx);
        if (!fixed_idx.empty()) q += problem.P(free_idx, fixed_idx) * sol.x(fixed_idx);
        std::vector<Scalar>* history = opts.record_history ? &sol.diag.history : nullptr;
        auto r = detail::solve_reduced<Scalar>(P, q, problem.lb(free_idx), problem.ub(free_idx), sol.x(free_idx),
                                               opts, history);
        sol.x(free_idx) = r.x;
        sol.diag.iterations = r.iterations;
        sol.diag.regularized = r.regularized;
    }
    sol.diag.objective = objective(problem, sol.x);
    sol.diag.kkt = kkt_residual(problem, sol.x);
    sol.diag.converged = sol.diag.kkt <= opts.tol;
    return sol;
}

}  // namespace myoctl
