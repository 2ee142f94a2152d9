#pragma once

// Bartels-Stewart solver for continuous Lyapunov equations
//   A^T P + P A + Q = 0.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gridvi/errors.hpp"

namespace gridvi {

/// Largest real part among the eigenvalues of `a`.
inline double spectral_abscissa(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
    return es.eigenvalues().real().maxCoeff();
}

namespace detail {

struct SchurBlock {
    Eigen::Index start;
    Eigen::Index size;
};

inline std::vector<SchurBlock> schur_blocks(const Eigen::MatrixXd& t) {
    std::vector<SchurBlock> blocks;
    const auto n = t.rows();
    for (Eigen::Index i = 0; i < n;) {
        if (i + 1 < n && t(i + 1, i) != 0.0) {
            blocks.push_back({i, 2});
            i += 2;
        } else {
            blocks.push_back({i, 1});
            i += 1;
        }
    }
    return blocks;
}

// Solves  Tii^T Y + Y Tjj = R  for a block of at most 2x2 via its Kronecker form.
inline Eigen::MatrixXd small_sylvester(const Eigen::MatrixXd& tii, const Eigen::MatrixXd& tjj,
                                       const Eigen::MatrixXd& rhs) {
    const auto p = tii.rows();
    const auto q = tjj.rows();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(p * q, p * q);
    // Column-major vec: vec(Tii^T Y) = (I_q kron Tii^T) vec(Y); vec(Y Tjj) = (Tjj^T kron I_p) vec(Y).
    for (Eigen::Index c = 0; c < q; ++c)
        k.block(c * p, c * p, p, p) += tii.transpose();
    for (Eigen::Index c = 0; c < q; ++c)
        for (Eigen::Index d = 0; d < q; ++d)
            k.block(c * p, d * p, p, p) += tjj(d, c) * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(rhs.data(), p * q);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    if (!lu.isInvertible())
        throw NumericalError("undamped system; Lyapunov equation has no PSD solution");
    Eigen::VectorXd y = lu.solve(r);
    return Eigen::Map<Eigen::MatrixXd>(y.data(), p, q);
}

} // namespace detail

/// Solves A^T P + P A + Q = 0 for symmetric P. Requires A Hurwitz.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    const auto n = a.rows();
    if (a.cols() != n || q.rows() != n || q.cols() != n) throw InputError("solve_lyapunov: dimension mismatch");
    if (n == 0) return Eigen::MatrixXd(0, 0);
    if (spectral_abscissa(a) >= 0.0)
        throw NumericalError("undamped system; Lyapunov equation has no PSD solution");

    Eigen::RealSchur<Eigen::MatrixXd> schur(a);
    if (schur.info() != Eigen::Success) throw NumericalError("real Schur decomposition failed");
    const Eigen::MatrixXd& t = schur.matrixT();
    const Eigen::MatrixXd& u = schur.matrixU();

    // In Schur coordinates: T^T Y + Y T = -U^T Q U.
    Eigen::MatrixXd rhs = -(u.transpose() * q * u);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
    const auto blocks = detail::schur_blocks(t);

    for (const auto& bj : blocks) {
        for (const auto& bi : blocks) {
            Eigen::MatrixXd r = rhs.block(bi.start, bj.start, bi.size, bj.size);
            // Already solved columns k < j contribute Y_ik T_kj.
            if (bj.start > 0)
                r -= y.block(bi.start, 0, bi.size, bj.start) * t.block(0, bj.start, bj.start, bj.size);
            // Already solved rows l < i in column j contribute T_li^T Y_lj.
            if (bi.start > 0)
                r -= t.block(0, bi.start, bi.start, bi.size).transpose() *
                     y.block(0, bj.start, bi.start, bj.size);
            y.block(bi.start, bj.start, bi.size, bj.size) =
                detail::small_sylvester(t.block(bi.start, bi.start, bi.size, bi.size),
                                        t.block(bj.start, bj.start, bj.size, bj.size), r);
        }
    }
    Eigen::MatrixXd p = u * y * u.transpose();
    return 0.5 * (p + p.transpose());
}

/// Controllability Gramian: A X + X A^T + B B^T = 0.
inline Eigen::MatrixXd controllability_gramian(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return solve_lyapunov(a.transpose(), b * b.transpose());
}

/// Frobenius norm of A^T P + P A + Q.
inline double lyapunov_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    return (a.transpose() * p + p * a + q).norm();
}

} // namespace gridvi
