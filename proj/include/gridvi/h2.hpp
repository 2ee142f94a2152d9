#pragma once

// Fiedler-mode weighted performance output, H2 norm through the
// observability Gramian, and its gradient with respect to nodal inertia.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gridvi/errors.hpp"
#include "gridvi/lyapunov.hpp"
#include "gridvi/spectral.hpp"
#include "gridvi/swing.hpp"

namespace gridvi {

/// y = blockdiag(N^{1/2}, U^{1/2}) (theta, omega) with N = L_red and
/// U = diag(|u_2|). The deflated output acts on (z, omega).
struct PerformanceOutput {
    Eigen::MatrixXd angle_weight;    // N
    Eigen::VectorXd fiedler_weights; // diagonal of U
    Eigen::MatrixXd c;               // 2N x 2N
    Eigen::MatrixXd c_r;             // 2N x (2N-1)
    Eigen::MatrixXd gram_r;          // C_r^T C_r
};

/// Symmetric PSD square root; tiny negative eigenvalues are clipped.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

inline PerformanceOutput build_output(const ReducedNetwork& net, const FiedlerMode& f) {
    const auto n = net.size();
    if (f.weights.size() != n) throw InputError("build_output: Fiedler mode does not match the network");
    PerformanceOutput out;
    out.angle_weight = net.laplacian;
    out.fiedler_weights = f.weights;
    const Eigen::MatrixXd root = psd_sqrt(net.laplacian);
    const Eigen::VectorXd u_root = f.weights.cwiseSqrt();

    out.c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    out.c.topLeftCorner(n, n) = root;
    out.c.bottomRightCorner(n, n) = u_root.asDiagonal();

    const Eigen::MatrixXd q = uniform_complement_basis(n);
    out.c_r = Eigen::MatrixXd::Zero(2 * n, 2 * n - 1);
    out.c_r.topLeftCorner(n, n - 1) = root * q;
    out.c_r.bottomRightCorner(n, n) = u_root.asDiagonal();

    // Form the Gramian directly from N so it carries no square-root round-off.
    out.gram_r = Eigen::MatrixXd::Zero(2 * n - 1, 2 * n - 1);
    out.gram_r.topLeftCorner(n - 1, n - 1) = q.transpose() * net.laplacian * q;
    out.gram_r.bottomRightCorner(n, n) = f.weights.asDiagonal();
    out.gram_r = 0.5 * (out.gram_r + out.gram_r.transpose());
    return out;
}

struct H2Evaluation {
    double squared = 0.0;
    double norm = 0.0;
    Eigen::MatrixXd observability_gramian;
    double relative_residual = 0.0; // ||P A + A^T P + C^T C||_F / ||C^T C||_F
};

inline H2Evaluation h2_evaluate(const ClosedLoopModel& model, const PerformanceOutput& out) {
    if (out.gram_r.rows() != model.a_r.rows()) throw InputError("h2: output does not match model");
    H2Evaluation ev;
    ev.observability_gramian = solve_lyapunov(model.a_r, out.gram_r);
    ev.squared = (model.b_r.transpose() * ev.observability_gramian * model.b_r).trace();
    ev.squared = std::max(ev.squared, 0.0);
    ev.norm = std::sqrt(ev.squared);
    const double scale = out.gram_r.norm();
    ev.relative_residual =
        lyapunov_residual(model.a_r, ev.observability_gramian, out.gram_r) / (scale > 0.0 ? scale : 1.0);
    return ev;
}

inline double h2_norm(const ClosedLoopModel& model, const PerformanceOutput& out) {
    return h2_evaluate(model, out).norm;
}

/// d||G||_2^2 / d m_i at each candidate bus, where m_i enters through M_cl.
/// Two-Gramian adjoint: 2 tr(X P dA) + 2 tr(B^T P dB).
inline Eigen::VectorXd h2_gradient(const ClosedLoopModel& model, const PerformanceOutput& out,
                                   const std::vector<BusId>& candidates) {
    const auto n = model.size();
    const auto r = n - 1;
    const Eigen::MatrixXd p = solve_lyapunov(model.a_r, out.gram_r);
    const Eigen::MatrixXd x = controllability_gramian(model.a_r, model.b_r);
    const Eigen::MatrixXd xp = x * p;
    const Eigen::MatrixXd pb = p * model.b_r;
    const Eigen::MatrixXd lq = model.laplacian * model.basis;

    Eigen::VectorXd grad(static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto i = model.index_of(candidates[c]);
        const auto row = r + i;
        const double inv_m2 = 1.0 / (model.m_cl(i) * model.m_cl(i));
        // Row `row` of dA_r: (+LQ_i / m^2, ..., +d_i / m^2 at omega_i).
        double dtr_a = 0.0;
        for (Eigen::Index j = 0; j < r; ++j) dtr_a += xp(j, row) * lq(i, j) * inv_m2;
        dtr_a += xp(row, row) * model.d_cl(i) * inv_m2;
        // Row `row` of dB_r: -sqrt(v_i)/m^2 in column i.
        const double dtr_b = pb(row, i) * (-std::sqrt(model.disturbance_scaling(i)) * inv_m2);
        grad(static_cast<Eigen::Index>(c)) = 2.0 * dtr_a + 2.0 * dtr_b;
    }
    return grad;
}

} // namespace gridvi
