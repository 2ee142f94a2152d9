#pragma once

// Kron reduction onto generator buses, spectrum of the reduced Laplacian,
// Fiedler mode and the modal (uniform inertia/damping) frequency response.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridvi/errors.hpp"
#include "gridvi/grid_model.hpp"

namespace gridvi {

/// Reduced Laplacian with its eigendecomposition, eigenvalues ascending.
struct ReducedNetwork {
    Eigen::MatrixXd laplacian;
    std::vector<BusId> bus_ids;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors; // orthonormal columns
    // Injection at an eliminated bus k reaches retained bus i with weight
    // distribution(i, k) = (-L_gl L_ll^{-1})_ik; columns sum to one.
    std::vector<BusId> eliminated_ids;
    Eigen::MatrixXd distribution;

    [[nodiscard]] Eigen::Index size() const { return laplacian.rows(); }

    [[nodiscard]] Eigen::Index index_of(BusId id) const {
        auto it = std::find(bus_ids.begin(), bus_ids.end(), id);
        if (it == bus_ids.end()) throw InputError("bus " + std::to_string(id) + " is not in the reduced network");
        return it - bus_ids.begin();
    }
};

struct FiedlerMode {
    double eigenvalue = 0.0;
    Eigen::VectorXd components;
    Eigen::VectorXd weights; // |u_2i|
    bool degenerate = false;
    std::string warning;
};

namespace detail {

// Flip each column so that its first non-negligible entry is positive.
inline void canonical_signs(Eigen::MatrixXd& vecs) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        const double scale = vecs.col(c).cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
            if (std::abs(vecs(r, c)) > 1e-9 * scale) {
                if (vecs(r, c) < 0.0) vecs.col(c) *= -1.0;
                break;
            }
        }
    }
}

inline ReducedNetwork make_reduced(Eigen::MatrixXd lap, std::vector<BusId> ids) {
    ReducedNetwork net;
    // Symmetrize away round-off from the Schur complement.
    net.laplacian = 0.5 * (lap + lap.transpose());
    net.bus_ids = std::move(ids);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(net.laplacian);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of reduced Laplacian failed");
    net.eigenvalues = es.eigenvalues();
    net.eigenvectors = es.eigenvectors();
    canonical_signs(net.eigenvectors);
    return net;
}

} // namespace detail

/// Eliminates `passive` buses by Schur complement:
/// L_red = L_gg - L_gl L_ll^{-1} L_lg.
inline ReducedNetwork kron_reduce(const Laplacian& lap, const std::vector<BusId>& passive) {
    std::set<BusId> drop(passive.begin(), passive.end());
    for (BusId id : drop)
        if (!lap.index.count(id)) throw InputError("kron_reduce: unknown bus " + std::to_string(id));

    std::vector<Eigen::Index> keep_idx, drop_idx;
    std::vector<BusId> keep_ids, drop_ids;
    for (std::size_t i = 0; i < lap.bus_ids.size(); ++i) {
        if (drop.count(lap.bus_ids[i])) {
            drop_idx.push_back(static_cast<Eigen::Index>(i));
            drop_ids.push_back(lap.bus_ids[i]);
        } else {
            keep_idx.push_back(static_cast<Eigen::Index>(i));
            keep_ids.push_back(lap.bus_ids[i]);
        }
    }
    if (keep_idx.empty()) throw InputError("kron_reduce: no buses left after elimination");

    const Eigen::MatrixXd& L = lap.matrix;
    const Eigen::MatrixXd L_gg = L(keep_idx, keep_idx);
    if (drop_idx.empty()) {
        auto net = detail::make_reduced(L_gg, keep_ids);
        net.distribution = Eigen::MatrixXd(net.size(), 0);
        return net;
    }

    // L_ll is singular exactly when a component of the eliminated subgraph has
    // no branch into the retained set. Find such islands by graph search.
    {
        std::set<Eigen::Index> dropped(drop_idx.begin(), drop_idx.end());
        std::set<Eigen::Index> visited;
        for (Eigen::Index start : drop_idx) {
            if (visited.count(start)) continue;
            std::vector<Eigen::Index> island;
            bool anchored = false;
            std::queue<Eigen::Index> todo;
            todo.push(start);
            visited.insert(start);
            while (!todo.empty()) {
                Eigen::Index u = todo.front();
                todo.pop();
                island.push_back(u);
                for (Eigen::Index v = 0; v < L.rows(); ++v) {
                    if (v == u || L(u, v) == 0.0) continue;
                    if (!dropped.count(v))
                        anchored = true;
                    else if (visited.insert(v).second)
                        todo.push(v);
                }
            }
            if (!anchored) {
                std::sort(island.begin(), island.end());
                std::string ids;
                for (auto u : island) ids += (ids.empty() ? "" : ", ") + std::to_string(lap.bus_ids[u]);
                throw NumericalError("kron_reduce: singular passive block, island without generator path: " + ids);
            }
        }
    }

    const Eigen::MatrixXd L_gl = L(keep_idx, drop_idx);
    const Eigen::MatrixXd L_ll = L(drop_idx, drop_idx);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(L_ll);
    if (ldlt.info() != Eigen::Success) throw NumericalError("kron_reduce: factorization of passive block failed");
    const Eigen::MatrixXd solved = ldlt.solve(L_gl.transpose()); // L_ll^{-1} L_lg
    Eigen::MatrixXd reduced = L_gg - L_gl * solved;
    auto net = detail::make_reduced(std::move(reduced), keep_ids);
    net.eliminated_ids = drop_ids;
    net.distribution = -solved.transpose();
    return net;
}

/// Retained-bus equivalent of a power injection `dp` at any bus of the
/// original network (quasi-static passive buses).
inline Eigen::VectorXd reduce_injection(const ReducedNetwork& net, BusId bus, double dp) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(net.size());
    auto kept = std::find(net.bus_ids.begin(), net.bus_ids.end(), bus);
    if (kept != net.bus_ids.end()) {
        p(kept - net.bus_ids.begin()) = dp;
        return p;
    }
    auto gone = std::find(net.eliminated_ids.begin(), net.eliminated_ids.end(), bus);
    if (gone == net.eliminated_ids.end()) throw InputError("bus " + std::to_string(bus) + " is not part of the network");
    return net.distribution.col(gone - net.eliminated_ids.begin()) * dp;
}

/// Reduces onto the case's generator buses.
inline ReducedNetwork kron_reduce(const GridCase& c, const Laplacian& lap) {
    return kron_reduce(lap, c.passive_buses());
}

/// Second eigenpair of the reduced Laplacian, first non-zero component positive.
inline FiedlerMode fiedler(const ReducedNetwork& net) {
    const auto n = net.size();
    if (n < 2) throw InputError("fiedler: reduced network needs at least two buses");
    FiedlerMode f;
    f.eigenvalue = net.eigenvalues(1);
    if (!(f.eigenvalue > 1e-9 * net.eigenvalues(n - 1)))
        throw NumericalError("fiedler: reduced network is disconnected (lambda_2 ~ 0)");
    f.components = net.eigenvectors.col(1);
    f.weights = f.components.cwiseAbs();
    if (n >= 3 && std::abs(net.eigenvalues(2) - f.eigenvalue) <= 1e-8 * std::abs(f.eigenvalue)) {
        f.degenerate = true;
        f.warning = "lambda_2 and lambda_3 coincide; Fiedler weights depend on the eigensolver basis";
    }
    return f;
}

namespace detail {

// e^{-gamma t/2} * sin(w t)/w with w^2 = omega_sq; continues analytically to
// the sinh form for omega_sq < 0 and to t*e^{-gamma t/2} at omega_sq = 0.
inline double damped_kernel(double omega_sq, double gamma, double t) {
    const double half = 0.5 * gamma;
    if (omega_sq > 1e-14) {
        const double w = std::sqrt(omega_sq);
        return std::exp(-half * t) * std::sin(w * t) / w;
    }
    if (omega_sq < -1e-14) {
        const double k = std::sqrt(-omega_sq);
        // (e^{(k-half)t} - e^{-(k+half)t}) / (2k), k <= half so no overflow.
        return (std::exp((k - half) * t) - std::exp(-(k + half) * t)) / (2.0 * k);
    }
    // Series in omega_sq around the critically damped case.
    const double t2 = t * t;
    return std::exp(-half * t) * t * (1.0 - omega_sq * t2 / 6.0 + omega_sq * omega_sq * t2 * t2 / 120.0);
}

} // namespace detail

/// Per-bus frequency deviation at time t after a step `dp` at `disturbed_bus`,
/// for uniform inertia `m` and damping ratio `gamma` = d/m (modal sum).
inline Eigen::VectorXd modal_frequency_deviation(const ReducedNetwork& net, double m, double gamma,
                                                 BusId disturbed_bus, double dp, double t) {
    if (!(m > 0.0)) throw InputError("modal_frequency_deviation: m must be positive");
    if (gamma < 0.0) throw InputError("modal_frequency_deviation: gamma must be >= 0");
    if (t < 0.0) throw InputError("modal_frequency_deviation: t must be >= 0");
    const Eigen::Index b = net.index_of(disturbed_bus);
    const auto n = net.size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        // The zero mode is exactly constant; use 1/N for u_1i u_1b.
        const double lambda = a == 0 ? 0.0 : net.eigenvalues(a);
        const double kernel = detail::damped_kernel(lambda / m - 0.25 * gamma * gamma, gamma, t);
        if (a == 0)
            out.array() += kernel / static_cast<double>(n);
        else
            out += net.eigenvectors.col(a) * (net.eigenvectors(b, a) * kernel);
    }
    return out * (dp / m);
}

struct ModeRateRange {
    std::optional<std::pair<double, double>> interval;
    std::vector<Eigen::Index> overdamped_modes; // 1-based alpha
};

/// Range of sqrt(lambda_a/m - gamma^2/4) over a >= 2.
inline ModeRateRange mode_rate_range(const ReducedNetwork& net, double m, double gamma) {
    if (!(m > 0.0)) throw InputError("mode_rate_range: m must be positive");
    ModeRateRange r;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index a = 1; a < net.size(); ++a) {
        const double sq = net.eigenvalues(a) / m - 0.25 * gamma * gamma;
        if (sq <= 0.0) {
            r.overdamped_modes.push_back(a + 1);
            continue;
        }
        lo = std::min(lo, std::sqrt(sq));
        hi = std::max(hi, std::sqrt(sq));
    }
    if (r.overdamped_modes.empty() && net.size() > 1) r.interval = std::make_pair(lo, hi);
    return r;
}

} // namespace gridvi
