#pragma once
// Reference computations used to cross-check the production path. They are
// slow on purpose: the deflated model is rebuilt in long double and the
// Lyapunov equation is solved as one dense linear system, without sharing
// code with the Schur-based solver.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "allocation.hpp"

namespace gridvi::oracle {

using Real = long double;
using MatrixL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Solves A^T P + P A + Q = 0 through (I (x) A^T + A^T (x) I) vec(P) = -vec(Q).
inline MatrixL kronecker_lyapunov(const MatrixL& a, const MatrixL& q) {
    const auto r = a.rows();
    const MatrixL at = a.transpose();
    MatrixL k = MatrixL::Zero(r * r, r * r);
    for (Eigen::Index j = 0; j < r; ++j) {
        k.block(j * r, j * r, r, r) += at;
        for (Eigen::Index i = 0; i < r; ++i)
            if (at(j, i) != 0.0L) k.block(j * r, i * r, r, r).diagonal().array() += at(j, i);
    }
    const VectorL rhs = -Eigen::Map<const VectorL>(q.data(), r * r);
    VectorL p = k.partialPivLu().solve(rhs);
    MatrixL pm = Eigen::Map<MatrixL>(p.data(), r, r);
    return (0.5L * (pm + pm.transpose())).eval();
}

/// Squared H2 norm of the deflated closed loop with bus inertia `m`, damping
/// `d`, disturbance scaling `v`, synchronizing gain `gain` and Fiedler
/// weights `u`, assembled from scratch in extended precision.
inline Real h2_squared(const Eigen::MatrixXd& lap, const VectorL& m, const VectorL& d, const VectorL& v,
                       Real gain, const VectorL& u) {
    const auto n = lap.rows();
    const MatrixL l = lap.cast<Real>();
    VectorL w = VectorL::Ones(n);
    w(0) += std::sqrt(static_cast<Real>(n));
    const MatrixL house = MatrixL::Identity(n, n) - 2.0L * w * w.transpose() / w.squaredNorm();
    const MatrixL q = house.rightCols(n - 1);

    const auto r = 2 * n - 1;
    const VectorL m_inv = m.cwiseInverse();
    MatrixL a = MatrixL::Zero(r, r);
    a.topRightCorner(n - 1, n) = q.transpose();
    a.bottomLeftCorner(n, n - 1) = -(m_inv.asDiagonal() * (gain * l) * q);
    a.bottomRightCorner(n, n) = (-m_inv.cwiseProduct(d)).asDiagonal();
    MatrixL b = MatrixL::Zero(r, n);
    b.bottomRows(n) = m_inv.cwiseProduct(v.cwiseSqrt()).asDiagonal();
    MatrixL gram = MatrixL::Zero(r, r);
    gram.topLeftCorner(n - 1, n - 1) = q.transpose() * l * q;
    gram.bottomRightCorner(n, n) = u.asDiagonal();

    const MatrixL p = kronecker_lyapunov(a, gram);
    return (b.transpose() * p * b).trace();
}

inline Real objective(const AllocationProblem& prob, const Eigen::VectorXd& vi) {
    VectorL m = prob.inertia.cast<Real>();
    VectorL d = prob.damping.cast<Real>();
    for (std::size_t c = 0; c < prob.candidates.size(); ++c) {
        const auto i = prob.network.index_of(prob.candidates[c]);
        m(i) += static_cast<Real>(vi(static_cast<Eigen::Index>(c)));
        d(i) += static_cast<Real>(prob.vi_damping(static_cast<Eigen::Index>(c)));
    }
    return h2_squared(prob.network.laplacian, m, d, prob.disturbance_scaling.cast<Real>(), prob.synchronizing_gain,
                      prob.output.fiedler_weights.cast<Real>());
}

/// Central differences with h = 1e-5 max(m_i, 1). Where the central stencil
/// would leave the box on the low side, a second-order forward stencil is used.
inline Eigen::VectorXd fd_gradient(const AllocationProblem& prob, const Eigen::VectorXd& vi) {
    Eigen::VectorXd g(vi.size());
    const Real f0 = objective(prob, vi);
    for (Eigen::Index c = 0; c < vi.size(); ++c) {
        const double h = 1e-5 * std::max(vi(c), 1.0);
        const auto f_at = [&](double shift) {
            Eigen::VectorXd x = vi;
            x(c) += shift;
            return objective(prob, x);
        };
        const Real fd = vi(c) - h >= prob.bounds.lower(c)
                            ? (f_at(h) - f_at(-h)) / (2.0L * h)
                            : (-3.0L * f0 + 4.0L * f_at(h) - f_at(2.0 * h)) / (2.0L * h);
        g(c) = static_cast<double>(fd);
    }
    return g;
}

} // namespace gridvi::oracle
