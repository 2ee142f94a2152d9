#pragma once

// Networked swing dynamics with virtual-inertia devices: state-space
// assembly, zero-mode deflation, time-domain simulation and
// frequency-stability metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

#include "gridvi/errors.hpp"
#include "gridvi/grid_model.hpp"
#include "gridvi/lyapunov.hpp"
#include "gridvi/spectral.hpp"

namespace gridvi {

struct ViDevice {
    BusId bus = 0;
    double inertia_s = 0.0;  // m~_VI
    double damping_pu = 0.0; // d~_VI
    double p_max_pu = std::numeric_limits<double>::infinity(); // reporting only
};

/// State x = (theta, omega) on the reduced network; deflated coordinates
/// replace theta by z = Q^T theta where the columns of Q span 1^perp.
///
/// `laplacian` is the synchronizing matrix seen by the dynamics, i.e. the
/// reduced Laplacian times `synchronizing_gain`. With omega in p.u. and m in
/// seconds, a gain of 2 pi f_n makes gain * theta the rotor angle in radians;
/// a gain of 1 treats theta itself as the angle.
struct ClosedLoopModel {
    std::vector<BusId> bus_ids;
    Eigen::MatrixXd laplacian;
    double synchronizing_gain = 1.0;
    Eigen::VectorXd inertia;  // synchronous m_i
    Eigen::VectorXd damping;  // synchronous d_i
    Eigen::VectorXd vi_inertia;
    Eigen::VectorXd vi_damping;
    Eigen::VectorXd m_cl;
    Eigen::VectorXd d_cl;
    Eigen::VectorXd disturbance_scaling; // diagonal of V
    std::vector<ViDevice> devices;

    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    Eigen::MatrixXd basis; // Q, N x (N-1)
    Eigen::MatrixXd a_r;
    Eigen::MatrixXd b_r;

    [[nodiscard]] Eigen::Index size() const { return laplacian.rows(); }

    [[nodiscard]] Eigen::Index index_of(BusId id) const {
        auto it = std::find(bus_ids.begin(), bus_ids.end(), id);
        if (it == bus_ids.end()) throw InputError("bus " + std::to_string(id) + " is not a retained bus");
        return it - bus_ids.begin();
    }
};

/// Orthonormal basis of the complement of span{1} in R^n (Householder).
inline Eigen::MatrixXd uniform_complement_basis(Eigen::Index n) {
    if (n <= 1) return Eigen::MatrixXd(n, 0);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    w(0) -= 1.0;
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - (2.0 / w.squaredNorm()) * w * w.transpose();
    return h.rightCols(n - 1);
}

/// Synchronous inertia and damping of the retained buses, in reduced ordering.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> bus_parameters(const GridCase& c, const ReducedNetwork& net) {
    Eigen::VectorXd m(net.size()), d(net.size());
    for (Eigen::Index i = 0; i < net.size(); ++i) {
        const Bus* b = c.find_bus(net.bus_ids[i]);
        m(i) = b->inertia_s;
        d(i) = b->damping_pu;
    }
    return {m, d};
}

inline ClosedLoopModel assemble(const ReducedNetwork& net, const Eigen::VectorXd& m, const Eigen::VectorXd& d,
                                const std::vector<ViDevice>& devices, const Eigen::VectorXd& v_diag,
                                double synchronizing_gain = 1.0) {
    const auto n = net.size();
    if (m.size() != n || d.size() != n || v_diag.size() != n) throw InputError("assemble: dimension mismatch");
    if ((v_diag.array() < 0.0).any()) throw InputError("assemble: V must be nonnegative");
    if (!(synchronizing_gain > 0.0)) throw InputError("assemble: synchronizing gain must be positive");

    ClosedLoopModel model;
    model.bus_ids = net.bus_ids;
    model.synchronizing_gain = synchronizing_gain;
    model.laplacian = synchronizing_gain * net.laplacian;
    model.inertia = m;
    model.damping = d;
    model.vi_inertia = Eigen::VectorXd::Zero(n);
    model.vi_damping = Eigen::VectorXd::Zero(n);
    model.disturbance_scaling = v_diag;
    model.devices = devices;
    for (const auto& dev : devices) {
        if (dev.inertia_s < 0.0 || dev.damping_pu < 0.0)
            throw InputError("assemble: device at bus " + std::to_string(dev.bus) + " has negative parameters");
        const auto i = net.index_of(dev.bus);
        model.vi_inertia(i) += dev.inertia_s;
        model.vi_damping(i) += dev.damping_pu;
    }
    model.m_cl = m + model.vi_inertia;
    model.d_cl = d + model.vi_damping;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(model.m_cl(i) > 0.0))
            throw InputError("assemble: zero closed-loop inertia at bus " + std::to_string(net.bus_ids[i]));

    const Eigen::VectorXd m_inv = model.m_cl.cwiseInverse();
    const Eigen::MatrixXd minv_l = m_inv.asDiagonal() * model.laplacian;
    const Eigen::MatrixXd minv_d = (m_inv.array() * model.d_cl.array()).matrix().asDiagonal();
    const Eigen::MatrixXd minv_v = (m_inv.array() * v_diag.array().sqrt()).matrix().asDiagonal();

    model.a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    model.a.topRightCorner(n, n).setIdentity();
    model.a.bottomLeftCorner(n, n) = -minv_l;
    model.a.bottomRightCorner(n, n) = -minv_d;
    model.b = Eigen::MatrixXd::Zero(2 * n, n);
    model.b.bottomRows(n) = minv_v;

    model.basis = uniform_complement_basis(n);
    const auto r = n - 1;
    model.a_r = Eigen::MatrixXd::Zero(r + n, r + n);
    model.a_r.topRightCorner(r, n) = model.basis.transpose();
    model.a_r.bottomLeftCorner(n, r) = -minv_l * model.basis;
    model.a_r.bottomRightCorner(n, n) = -minv_d;
    model.b_r = Eigen::MatrixXd::Zero(r + n, n);
    model.b_r.bottomRows(n) = minv_v;
    return model;
}

/// Assembles with V = I over all retained buses.
inline ClosedLoopModel assemble(const ReducedNetwork& net, const Eigen::VectorXd& m, const Eigen::VectorXd& d,
                                const std::vector<ViDevice>& devices = {}) {
    return assemble(net, m, d, devices, Eigen::VectorXd::Ones(net.size()));
}

/// Step change of `dp_pu` injected at `bus` from `t_start_s` on.
struct StepEvent {
    BusId bus = 0;
    double dp_pu = 0.0;
    double t_start_s = 0.0;
};

/// Maps case disturbances onto retained buses; steps at eliminated buses are
/// spread with the Kron distribution factors.
inline std::vector<StepEvent> step_events(const ReducedNetwork& net, const std::vector<Disturbance>& ds) {
    std::vector<StepEvent> out;
    for (const auto& d : ds) {
        const Eigen::VectorXd p = reduce_injection(net, d.bus, d.dp_pu);
        for (Eigen::Index i = 0; i < p.size(); ++i)
            if (p(i) != 0.0) out.push_back({net.bus_ids[i], p(i), d.t_start_s});
    }
    return out;
}

struct ResponseTrace {
    Eigen::VectorXd time;
    std::vector<BusId> bus_ids;
    Eigen::MatrixXd theta;     // samples x buses, rad (gain * state)
    Eigen::MatrixXd omega;     // p.u. deviation
    Eigen::MatrixXd omega_dot; // p.u./s, right limit at event instants
    std::vector<BusId> device_buses;
    Eigen::MatrixXd p_vi;      // samples x devices, p.u.
    double t_disturbance = 0.0;

    [[nodiscard]] Eigen::Index samples() const { return time.size(); }
};

namespace detail {

inline Eigen::VectorXd injection_at(const ClosedLoopModel& model, const std::vector<StepEvent>& events, double t) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(model.size());
    for (const auto& e : events)
        if (e.t_start_s <= t) p(model.index_of(e.bus)) += e.dp_pu;
    return p;
}

inline std::vector<double> time_grid(const std::vector<StepEvent>& events, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end >= dt)) throw InputError("simulate: require dt > 0 and t_end >= dt");
    const auto steps = static_cast<long long>(std::llround(t_end / dt));
    std::vector<double> grid;
    for (long long k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * dt);
    const double tol = 1e-9 * dt;
    for (const auto& e : events) {
        if (e.t_start_s <= 0.0 || e.t_start_s >= grid.back()) continue;
        auto it = std::lower_bound(grid.begin(), grid.end(), e.t_start_s);
        bool near = (it != grid.end() && std::abs(*it - e.t_start_s) < tol) ||
                    (it != grid.begin() && std::abs(*(it - 1) - e.t_start_s) < tol);
        if (!near) grid.insert(it, e.t_start_s);
    }
    return grid;
}

inline double first_event(const std::vector<StepEvent>& events) {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& e : events)
        if (e.dp_pu != 0.0) t = std::min(t, e.t_start_s);
    return std::isfinite(t) ? t : 0.0;
}

// Accelerations and device powers at one sample, given the injection in force.
inline void fill_derived(const ClosedLoopModel& model, ResponseTrace& tr, Eigen::Index k,
                         const Eigen::VectorXd& coupling, const Eigen::VectorXd& p) {
    Eigen::VectorXd w = tr.omega.row(k).transpose();
    Eigen::VectorXd acc = (p - coupling - model.d_cl.cwiseProduct(w)).cwiseQuotient(model.m_cl);
    tr.omega_dot.row(k) = acc.transpose();
    for (std::size_t j = 0; j < model.devices.size(); ++j) {
        const auto& dev = model.devices[j];
        const auto i = model.index_of(dev.bus);
        tr.p_vi(k, static_cast<Eigen::Index>(j)) = -dev.inertia_s * acc(i) - dev.damping_pu * w(i);
    }
}

inline ResponseTrace empty_trace(const ClosedLoopModel& model, const std::vector<double>& grid) {
    ResponseTrace tr;
    const auto samples = static_cast<Eigen::Index>(grid.size());
    const auto n = model.size();
    tr.time = Eigen::Map<const Eigen::VectorXd>(grid.data(), samples);
    tr.bus_ids = model.bus_ids;
    tr.theta = Eigen::MatrixXd::Zero(samples, n);
    tr.omega = Eigen::MatrixXd::Zero(samples, n);
    tr.omega_dot = Eigen::MatrixXd::Zero(samples, n);
    for (const auto& dev : model.devices) tr.device_buses.push_back(dev.bus);
    tr.p_vi = Eigen::MatrixXd::Zero(samples, static_cast<Eigen::Index>(model.devices.size()));
    return tr;
}

} // namespace detail

/// Exact zero-order-hold discretization of x' = A x + B u over `h`:
/// returns (Phi, Gamma) from exp([[A, B], [0, 0]] h).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                              double h) {
    const auto n = a.rows();
    const auto m = b.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = a * h;
    aug.topRightCorner(n, m) = b * h;
    Eigen::MatrixXd e = aug.exp();
    return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// Input matrix of the raw power injections p (not scaled by V).
inline Eigen::MatrixXd injection_matrix(const ClosedLoopModel& model) {
    const auto n = model.size();
    Eigen::MatrixXd bp = Eigen::MatrixXd::Zero(2 * n, n);
    bp.bottomRows(n) = model.m_cl.cwiseInverse().asDiagonal();
    return bp;
}

/// Integrates the linear model from rest; exact per step.
inline ResponseTrace simulate_linear(const ClosedLoopModel& model, const std::vector<StepEvent>& events,
                                     double t_end, double dt) {
    const auto grid = detail::time_grid(events, t_end, dt);
    auto tr = detail::empty_trace(model, grid);
    tr.t_disturbance = detail::first_event(events);
    const auto n = model.size();
    const Eigen::MatrixXd bp = injection_matrix(model);
    const auto [phi_dt, gamma_dt] = discretize(model.a, bp, dt);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Eigen::VectorXd p = detail::injection_at(model, events, grid[k]);
        tr.theta.row(k) = model.synchronizing_gain * x.head(n).transpose();
        tr.omega.row(k) = x.tail(n).transpose();
        detail::fill_derived(model, tr, static_cast<Eigen::Index>(k), model.laplacian * x.head(n), p);
        if (k + 1 == grid.size()) break;
        const double h = grid[k + 1] - grid[k];
        if (std::abs(h - dt) <= 1e-12 * dt) {
            x = phi_dt * x + gamma_dt * p;
        } else {
            const auto [phi, gamma] = discretize(model.a, bp, h);
            x = phi * x + gamma * p;
        }
    }
    return tr;
}

/// Convenience: one step vector applied at t = 0.
inline ResponseTrace simulate_linear(const ClosedLoopModel& model, const Eigen::VectorXd& step, double t_end,
                                     double dt) {
    std::vector<StepEvent> events;
    for (Eigen::Index i = 0; i < step.size(); ++i)
        if (step(i) != 0.0) events.push_back({model.bus_ids[i], step(i), 0.0});
    return simulate_linear(model, events, t_end, dt);
}

/// Nonlinear swing model with sin coupling over the effective branches of the
/// reduced network; adaptive Dormand-Prince 5(4) with tolerance `tol`.
inline ResponseTrace simulate_nonlinear(const ClosedLoopModel& model, const std::vector<StepEvent>& events,
                                        double t_end, double dt, double tol = 1e-10) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    const auto grid = detail::time_grid(events, t_end, dt);
    auto tr = detail::empty_trace(model, grid);
    tr.t_disturbance = detail::first_event(events);
    const auto n = model.size();
    const double gain = model.synchronizing_gain;

    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> edges;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (model.laplacian(i, j) != 0.0) edges.emplace_back(i, j, -model.laplacian(i, j) / gain);

    // p_e,i = sum_j b_ij sin(delta_i - delta_j), delta = gain * theta.
    auto coupling = [&](const double* theta) {
        Eigen::VectorXd pe = Eigen::VectorXd::Zero(n);
        for (const auto& [i, j, bij] : edges) {
            const double f = bij * std::sin(gain * (theta[i] - theta[j]));
            pe(i) += f;
            pe(j) -= f;
        }
        return pe;
    };

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    auto rhs = [&](const State& x, State& dxdt, double) {
        const Eigen::VectorXd pe = coupling(x.data());
        for (Eigen::Index i = 0; i < n; ++i) {
            dxdt[i] = x[n + i];
            dxdt[n + i] = (p(i) - pe(i) - model.d_cl(i) * x[n + i]) / model.m_cl(i);
        }
    };

    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    State x(2 * n, 0.0);
    double h = std::min(dt, 1e-3);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        p = detail::injection_at(model, events, grid[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            tr.theta(k, i) = gain * x[i];
            tr.omega(k, i) = x[n + i];
        }
        detail::fill_derived(model, tr, static_cast<Eigen::Index>(k), coupling(x.data()), p);
        if (k + 1 == grid.size()) break;
        double t = grid[k];
        const double t_next = grid[k + 1];
        while (t < t_next) {
            double step = std::min(h, t_next - t);
            const bool clipped = step < h;
            if (stepper.try_step(rhs, x, t, step) == odeint::fail) {
                if (step < 1e-14 * std::max(1.0, std::abs(t)))
                    throw NumericalError("simulate_nonlinear: step size underflow at t = " + std::to_string(t));
                h = step;
                continue;
            }
            if (!clipped) h = step;
            if (std::abs(t_next - t) < 1e-13 * std::max(1.0, t_next)) t = t_next;
        }
    }
    return tr;
}

/// Frequency-stability metrics derived from a trace.
struct Metrics {
    double nominal_hz = 60.0;
    double rocof_window_s = 0.25;
    double t_disturbance = 0.0;
    std::vector<BusId> bus_ids;
    Eigen::VectorXd rocof_windowed;  // Hz/s, slope over the window
    Eigen::VectorXd rocof_instant;   // Hz/s at t_disturbance+
    Eigen::VectorXd nadir_hz;
    Eigen::VectorXd time_to_nadir_s; // from t_disturbance
    double avg_rocof_windowed = 0.0;
    double avg_rocof_instant = 0.0;
    double max_abs_rocof_instant = 0.0;
    double max_abs_rocof_windowed = 0.0;
    double avg_nadir_hz = 0.0;
    double min_nadir_hz = 0.0;
    double avg_time_to_nadir_s = 0.0;
};

namespace detail {

inline double interpolate(const Eigen::VectorXd& t, const Eigen::VectorXd& y, double at) {
    const double* begin = t.data();
    const double* end = t.data() + t.size();
    auto it = std::lower_bound(begin, end, at);
    if (it == end) return y(t.size() - 1);
    const auto k = it - begin;
    if (*it == at || k == 0) return y(k);
    const double w = (at - t(k - 1)) / (t(k) - t(k - 1));
    return (1.0 - w) * y(k - 1) + w * y(k);
}

} // namespace detail

inline Metrics metrics(const ResponseTrace& tr, double nominal_hz, double rocof_window_s) {
    if (tr.samples() == 0) throw InputError("metrics: empty trace");
    if (!(rocof_window_s > 0.0)) throw InputError("metrics: rocof window must be positive");
    const double t0 = tr.t_disturbance;
    if (t0 + rocof_window_s > tr.time(tr.samples() - 1) + 1e-12)
        throw InputError("metrics: rocof window exceeds trace length");

    Metrics m;
    m.nominal_hz = nominal_hz;
    m.rocof_window_s = rocof_window_s;
    m.t_disturbance = t0;
    m.bus_ids = tr.bus_ids;
    const auto n = static_cast<Eigen::Index>(tr.bus_ids.size());
    m.rocof_windowed.resize(n);
    m.rocof_instant.resize(n);
    m.nadir_hz.resize(n);
    m.time_to_nadir_s.resize(n);

    Eigen::Index k0 = 0;
    while (k0 + 1 < tr.samples() && tr.time(k0) < t0 - 1e-12) ++k0;

    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd w = tr.omega.col(i);
        const double w0 = detail::interpolate(tr.time, w, t0);
        const double w1 = detail::interpolate(tr.time, w, t0 + rocof_window_s);
        m.rocof_windowed(i) = nominal_hz * (w1 - w0) / rocof_window_s;
        m.rocof_instant(i) = nominal_hz * tr.omega_dot(k0, i);
        Eigen::Index kmin = k0;
        for (Eigen::Index k = k0; k < tr.samples(); ++k)
            if (w(k) < w(kmin)) kmin = k;
        m.nadir_hz(i) = nominal_hz * (1.0 + w(kmin));
        m.time_to_nadir_s(i) = tr.time(kmin) - t0;
    }
    m.avg_rocof_windowed = m.rocof_windowed.mean();
    m.avg_rocof_instant = m.rocof_instant.mean();
    m.max_abs_rocof_instant = m.rocof_instant.cwiseAbs().maxCoeff();
    m.max_abs_rocof_windowed = m.rocof_windowed.cwiseAbs().maxCoeff();
    m.avg_nadir_hz = m.nadir_hz.mean();
    m.min_nadir_hz = m.nadir_hz.minCoeff();
    m.avg_time_to_nadir_s = m.time_to_nadir_s.mean();
    return m;
}

} // namespace gridvi
