#pragma once

// Budgeted virtual-inertia allocation: projection onto
// {x : sum x = budget, lower <= x <= upper} and projected gradient descent on
// the squared H2 norm.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridvi/errors.hpp"
#include "gridvi/grid_model.hpp"
#include "gridvi/h2.hpp"
#include "gridvi/spectral.hpp"
#include "gridvi/swing.hpp"

namespace gridvi {

struct FeasibleSet {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double budget = 0.0;
};

inline void check_feasible(const FeasibleSet& s) {
    if (s.lower.size() != s.upper.size()) throw InputError("feasible set: bound size mismatch");
    if (!std::isfinite(s.budget) || s.budget < 0.0)
        throw InfeasibleError("budget must be finite and nonnegative");
    for (Eigen::Index i = 0; i < s.lower.size(); ++i)
        if (s.lower(i) > s.upper(i))
            throw InfeasibleError("lower bound exceeds upper bound at candidate " + std::to_string(i));
    const double tol = 1e-12 * std::max(1.0, s.budget);
    if (s.lower.sum() > s.budget + tol || s.upper.sum() < s.budget - tol)
        throw InfeasibleError("budget " + std::to_string(s.budget) + " outside [" + std::to_string(s.lower.sum()) +
                              ", " + std::to_string(s.upper.sum()) + "] spanned by the candidate bounds");
}

namespace detail {

inline Eigen::VectorXd shifted_clip(const Eigen::VectorXd& y, double tau, const FeasibleSet& s) {
    return (y.array() - tau).max(s.lower.array()).min(s.upper.array()).matrix();
}

} // namespace detail

/// Euclidean projection: x = clip(y - tau, lower, upper) with tau found by
/// bisection on the budget equation, then solved exactly on the free set.
inline Eigen::VectorXd project_feasible(const Eigen::VectorXd& y, const FeasibleSet& s) {
    check_feasible(s);
    if (y.size() != s.lower.size()) throw InputError("project_feasible: dimension mismatch");
    if (y.size() == 0) return y;
    double lo = (y - s.upper).minCoeff(); // sum >= budget at lo
    double hi = (y - s.lower).maxCoeff(); // sum <= budget at hi
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (detail::shifted_clip(y, mid, s).sum() > s.budget)
            lo = mid;
        else
            hi = mid;
    }
    double tau = 0.5 * (lo + hi);
    Eigen::VectorXd x = detail::shifted_clip(y, tau, s);

    // Exact shift over the coordinates strictly inside their bounds.
    double free_sum = 0.0, fixed_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (x(i) > s.lower(i) && x(i) < s.upper(i)) {
            free_sum += y(i);
            ++free_count;
        } else {
            fixed_sum += x(i);
        }
    }
    if (free_count > 0) {
        tau = (free_sum - (s.budget - fixed_sum)) / free_count;
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (x(i) > s.lower(i) && x(i) < s.upper(i)) x(i) = std::clamp(y(i) - tau, s.lower(i), s.upper(i));
    }
    return x;
}

struct KktReport {
    double shift = 0.0;
    double residual = 0.0; // largest violation of the projection optimality conditions
};

/// Verifies that `x` is the projection of `y`: interior coordinates share the
/// shift tau = y_i - x_i, coordinates at a bound have correctly signed multipliers.
inline KktReport projection_kkt(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const FeasibleSet& s,
                                double bound_tol = 1e-12) {
    KktReport rep;
    const double scale = std::max(1.0, s.budget);
    std::vector<double> shifts;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool at_lo = x(i) <= s.lower(i) + bound_tol * scale;
        const bool at_hi = x(i) >= s.upper(i) - bound_tol * scale;
        if (!at_lo && !at_hi) shifts.push_back(y(i) - x(i));
    }
    if (!shifts.empty()) {
        double mean = 0.0;
        for (double t : shifts) mean += t;
        rep.shift = mean / static_cast<double>(shifts.size());
    } else {
        // Any shift between the bound-active constraints works; take the tightest.
        double lo = -std::numeric_limits<double>::infinity(), hi = -lo;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (s.lower(i) == s.upper(i)) continue;
            if (x(i) <= s.lower(i) + bound_tol * scale) lo = std::max(lo, y(i) - s.lower(i));
            else hi = std::min(hi, y(i) - s.upper(i));
        }
        rep.shift = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
    }
    double worst = std::abs(x.sum() - s.budget);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        worst = std::max({worst, s.lower(i) - x(i), x(i) - s.upper(i)});
        const double z = y(i) - rep.shift;
        const bool at_lo = x(i) <= s.lower(i) + bound_tol * scale;
        const bool at_hi = x(i) >= s.upper(i) - bound_tol * scale;
        if (at_lo && at_hi) continue;
        if (at_lo)
            worst = std::max(worst, z - s.lower(i)); // multiplier lower - z must be >= 0
        else if (at_hi)
            worst = std::max(worst, s.upper(i) - z);
        else
            worst = std::max(worst, std::abs(z - x(i)));
    }
    rep.residual = worst;
    return rep;
}

/// ||x - P(x - g)||, zero exactly at KKT points of min f over the feasible set.
inline double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const FeasibleSet& s) {
    return (x - project_feasible(x - g, s)).norm();
}

enum class StepRule {
    Fixed,           // every line search starts at initial_step
    BarzilaiBorwein, // first search at initial_step, then s^T s / s^T y
};

struct SolverSettings {
    StepRule step_rule = StepRule::BarzilaiBorwein;
    double initial_step = 1.0;
    double backtrack = 0.5;
    double armijo_c1 = 1e-4;
    double rel_tol = 1e-8;
    double pg_tol = 1e-6;
    int max_iterations = 500;
};

/// Everything needed to evaluate the allocation objective for a vector of
/// per-candidate virtual inertia.
struct AllocationProblem {
    ReducedNetwork network;
    Eigen::VectorXd inertia; // synchronous, per retained bus
    Eigen::VectorXd damping;
    std::vector<BusId> candidates;
    Eigen::VectorXd vi_damping; // per candidate, fixed
    FeasibleSet bounds;         // on the virtual part, per candidate
    Eigen::VectorXd disturbance_scaling;
    double synchronizing_gain = 1.0;
    PerformanceOutput output;
    SolverSettings settings;
};

/// Builds the problem from a case: candidates, bounds and virtual damping from
/// `vi_candidates`; V = I unless `v_diag` is given; Fiedler weights from the
/// open-loop reduced network.
inline AllocationProblem make_allocation_problem(const GridCase& c, const ReducedNetwork& net, double budget,
                                                 std::optional<Eigen::VectorXd> v_diag = std::nullopt) {
    AllocationProblem prob;
    prob.network = net;
    std::tie(prob.inertia, prob.damping) = bus_parameters(c, net);
    const auto k = static_cast<Eigen::Index>(c.vi_candidates.size());
    prob.vi_damping.resize(k);
    prob.bounds.lower.resize(k);
    prob.bounds.upper.resize(k);
    prob.bounds.budget = budget;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& cand = c.vi_candidates[i];
        prob.candidates.push_back(cand.bus);
        prob.vi_damping(i) = cand.d_vi_pu;
        prob.bounds.lower(i) = cand.m_min_s;
        prob.bounds.upper(i) = cand.m_max_s;
    }
    prob.disturbance_scaling = v_diag.value_or(Eigen::VectorXd::Ones(net.size()));
    prob.output = build_output(net, fiedler(net));
    return prob;
}

inline std::vector<ViDevice> allocation_devices(const AllocationProblem& prob, const Eigen::VectorXd& vi) {
    std::vector<ViDevice> devs;
    for (std::size_t c = 0; c < prob.candidates.size(); ++c)
        devs.push_back({prob.candidates[c], vi(static_cast<Eigen::Index>(c)), prob.vi_damping(static_cast<Eigen::Index>(c))});
    return devs;
}

inline ClosedLoopModel allocation_model(const AllocationProblem& prob, const Eigen::VectorXd& vi) {
    return assemble(prob.network, prob.inertia, prob.damping, allocation_devices(prob, vi), prob.disturbance_scaling,
                    prob.synchronizing_gain);
}

inline double allocation_objective(const AllocationProblem& prob, const Eigen::VectorXd& vi) {
    return h2_evaluate(allocation_model(prob, vi), prob.output).squared;
}

inline Eigen::VectorXd allocation_gradient(const AllocationProblem& prob, const Eigen::VectorXd& vi) {
    return h2_gradient(allocation_model(prob, vi), prob.output, prob.candidates);
}

/// Uniform budget split, clipped to the boxes and re-projected.
inline Eigen::VectorXd uniform_allocation(const AllocationProblem& prob) {
    const auto k = static_cast<Eigen::Index>(prob.candidates.size());
    if (k == 0) return Eigen::VectorXd(0);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(k, prob.bounds.budget / static_cast<double>(k));
    x = x.cwiseMax(prob.bounds.lower).cwiseMin(prob.bounds.upper);
    return project_feasible(x, prob.bounds);
}

enum class AllocationStatus { Converged, Stalled, MaxIterations };

inline const char* to_string(AllocationStatus s) {
    switch (s) {
    case AllocationStatus::Converged: return "converged";
    case AllocationStatus::Stalled: return "stalled";
    case AllocationStatus::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

struct IterationRecord {
    int iteration = 0;
    double objective = 0.0;
    double pg_norm = 0.0;
    double step = 0.0;
};

struct AllocationResult {
    std::vector<BusId> candidates;
    Eigen::VectorXd vi_inertia;
    double objective = 0.0;
    double initial_objective = 0.0;
    double pg_norm = 0.0;
    int iterations = 0;
    AllocationStatus status = AllocationStatus::MaxIterations;
    std::vector<IterationRecord> log;
};

/// Projected gradient descent with Armijo backtracking from `start`
/// (uniform allocation when absent). Deterministic.
inline AllocationResult optimize(const AllocationProblem& prob, std::optional<Eigen::VectorXd> start = std::nullopt) {
    check_feasible(prob.bounds);
    const auto& cfg = prob.settings;
    AllocationResult res;
    res.candidates = prob.candidates;

    Eigen::VectorXd x = start ? project_feasible(*start, prob.bounds) : uniform_allocation(prob);
    double f = allocation_objective(prob, x);
    res.initial_objective = f;
    Eigen::VectorXd g = allocation_gradient(prob, x);
    double pg = projected_gradient_norm(x, g, prob.bounds);
    res.log.push_back({0, f, pg, 0.0});

    res.status = AllocationStatus::MaxIterations;
    double trial_step = cfg.initial_step;
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        if (pg < cfg.pg_tol) {
            res.status = AllocationStatus::Converged;
            break;
        }
        double step = trial_step;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = f;
        while (step > 1e-20) {
            x_new = project_feasible(x - step * g, prob.bounds);
            f_new = allocation_objective(prob, x_new);
            if (f_new <= f + cfg.armijo_c1 * g.dot(x_new - x)) {
                accepted = true;
                break;
            }
            step *= cfg.backtrack;
        }
        if (!accepted) {
            res.status = AllocationStatus::Stalled;
            break;
        }
        const double decrease = f - f_new;
        const Eigen::VectorXd g_new = allocation_gradient(prob, x_new);
        if (cfg.step_rule == StepRule::BarzilaiBorwein) {
            const Eigen::VectorXd ds = x_new - x;
            const double curv = ds.dot(g_new - g);
            trial_step = curv > 0.0 ? std::clamp(ds.squaredNorm() / curv, 1e-8 * cfg.initial_step,
                                                 1e8 * cfg.initial_step)
                                    : cfg.initial_step;
        }
        x = x_new;
        f = f_new;
        g = g_new;
        pg = projected_gradient_norm(x, g, prob.bounds);
        res.log.push_back({it + 1, f, pg, step});
        if (pg < cfg.pg_tol) {
            ++it;
            res.status = AllocationStatus::Converged;
            break;
        }
        if (decrease <= cfg.rel_tol * std::abs(f)) {
            ++it;
            res.status = AllocationStatus::Stalled;
            break;
        }
    }
    res.iterations = it;
    res.vi_inertia = x;
    res.objective = f;
    res.pg_norm = pg;
    return res;
}

/// Random feasible point: uniform in the box, then projected. Uses the raw
/// 64-bit engine output so results do not depend on the standard library.
inline Eigen::VectorXd random_feasible(const FeasibleSet& s, std::mt19937_64& rng) {
    Eigen::VectorXd x(s.lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x(i) = s.lower(i) + u * (s.upper(i) - s.lower(i));
    }
    return project_feasible(x, s);
}

/// Best of `starts` runs: the uniform start first, then random feasible
/// starts drawn from `seed`. Runs concurrently when `parallel`.
inline AllocationResult optimize_multistart(const AllocationProblem& prob, int starts, std::uint64_t seed,
                                            bool parallel = true) {
    if (starts < 1) throw InputError("optimize: starts must be >= 1");
    std::vector<Eigen::VectorXd> inits{uniform_allocation(prob)};
    std::mt19937_64 rng(seed);
    for (int k = 1; k < starts; ++k) inits.push_back(random_feasible(prob.bounds, rng));

    std::vector<AllocationResult> results(inits.size());
    if (parallel && inits.size() > 1) {
        std::vector<std::future<AllocationResult>> futures;
        for (const auto& x0 : inits)
            futures.push_back(std::async(std::launch::async, [&prob, x0] { return optimize(prob, x0); }));
        for (std::size_t k = 0; k < futures.size(); ++k) results[k] = futures[k].get();
    } else {
        for (std::size_t k = 0; k < inits.size(); ++k) results[k] = optimize(prob, inits[k]);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < results.size(); ++k)
        if (results[k].objective < results[best].objective) best = k;
    return results[best];
}

} // namespace gridvi
