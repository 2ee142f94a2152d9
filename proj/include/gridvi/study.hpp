#pragma once
// End-to-end studies behind the command-line tool: reduce, simulate,
// optimize and report. Each command writes its artifacts into one output
// directory and never prints timestamps, so reruns are byte-identical.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "allocation.hpp"
#include "errors.hpp"
#include "grid_model.hpp"
#include "h2.hpp"
#include "io.hpp"
#include "oracles.hpp"
#include "spectral.hpp"
#include "swing.hpp"

namespace gridvi {

namespace fs = std::filesystem;

inline const std::array<std::string, 3> kScenarios{"base", "unopt", "opt"};

struct StudyConfig {
    fs::path case_path;
    fs::path out_dir = "out";
    double budget = 0.0;
    std::optional<std::vector<Disturbance>> disturbances; // replaces the case list when set
    double rocof_window = 0.25;
    double horizon = 20.0;
    double dt = 0.01;
    int starts = 1;
    std::uint64_t seed = 1;
    std::string scenario = "all";
    std::string model = "linear"; // or "nonlinear"
    bool parallel = true;
};

/// Parses BUS:DP_PU[:T0]; T0 defaults to 0.
inline Disturbance parse_disturbance(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto next = text.find(':', pos);
        parts.push_back(text.substr(pos, next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    const auto bad = [&] { return InputError("disturbance '" + std::string(text) + "': expected BUS:DP_PU[:T0]"); };
    if (parts.size() < 2 || parts.size() > 3) throw bad();

    Disturbance d;
    auto [p, ec] = std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), d.bus);
    if (ec != std::errc{} || p != parts[0].data() + parts[0].size()) throw bad();
    const auto to_double = [&](std::string_view s) {
        std::string buf(s);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(buf, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != buf.size() || !std::isfinite(v)) throw bad();
        return v;
    };
    d.dp_pu = to_double(parts[1]);
    if (parts.size() == 3) d.t_start_s = to_double(parts[2]);
    if (d.t_start_s < 0.0) throw bad();
    return d;
}

inline void validate_config(const StudyConfig& cfg) {
    if (cfg.case_path.empty()) throw InputError("config: case path is required");
    if (!fs::exists(cfg.case_path)) throw InputError("config: case file not found: " + cfg.case_path.string());
    if (!(cfg.horizon > 0.0)) throw InputError("config: horizon must be > 0");
    if (!(cfg.dt > 0.0) || cfg.dt > cfg.horizon) throw InputError("config: dt must be in (0, horizon]");
    if (!(cfg.budget >= 0.0)) throw InputError("config: budget must be >= 0");
    if (!(cfg.rocof_window > 0.0)) throw InputError("config: rocof-window must be > 0");
    if (cfg.starts < 1) throw InputError("config: starts must be >= 1");
    if (cfg.scenario != "all" && std::find(kScenarios.begin(), kScenarios.end(), cfg.scenario) == kScenarios.end())
        throw InputError("config: scenario must be base, unopt, opt or all");
    if (cfg.model != "linear" && cfg.model != "nonlinear")
        throw InputError("config: model must be linear or nonlinear");
}

/// Case data plus everything derived from the network alone.
struct Study {
    GridCase grid;
    Laplacian full;
    ReducedNetwork net;
    FiedlerMode mode;
    double gain = 1.0; // 2 pi f_n
};

inline Study load_study(const StudyConfig& cfg) {
    Study s;
    s.grid = parse_case(cfg.case_path);
    if (cfg.disturbances) {
        s.grid.disturbances = *cfg.disturbances;
        validate_case(s.grid);
    }
    s.full = build_laplacian(s.grid);
    s.net = kron_reduce(s.grid, s.full);
    if (s.net.size() < 2) throw InputError("study: at least two generator buses are required");
    s.mode = fiedler(s.net);
    s.gain = 2.0 * std::numbers::pi * s.grid.nominal_hz;
    return s;
}

inline AllocationProblem study_problem(const Study& s, double budget) {
    auto prob = make_allocation_problem(s.grid, s.net, budget);
    prob.synchronizing_gain = s.gain;
    return prob;
}

namespace detail {

/// Angles of the full network for injection p, grounded at `ref`.
inline Eigen::VectorXd grounded_solve(const Eigen::MatrixXd& lap, const Eigen::VectorXd& p, Eigen::Index ref) {
    const auto n = lap.rows();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != ref) keep.push_back(i);
    const Eigen::MatrixXd sub = lap(keep, keep);
    const Eigen::VectorXd rhs = p(keep);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd sol = sub.ldlt().solve(rhs);
    theta(keep) = sol;
    return theta;
}

} // namespace detail

// ---------------------------------------------------------------- reduce

struct ReduceSummary {
    std::size_t retained = 0;
    std::size_t eliminated = 0;
    double fiedler_value = 0.0;
    bool degenerate = false;
};

inline ReduceSummary cmd_reduce(const StudyConfig& cfg) {
    const Study s = load_study(cfg);
    fs::create_directories(cfg.out_dir);
    const auto& net = s.net;
    {
        io::CsvWriter w(cfg.out_dir / "spectrum.csv", {"alpha", "lambda"});
        for (Eigen::Index a = 0; a < net.eigenvalues.size(); ++a) w.row(static_cast<int>(a + 1), net.eigenvalues(a));
    }
    {
        io::CsvWriter w(cfg.out_dir / "fiedler.csv", {"bus_id", "u2_component", "abs_u2"});
        for (Eigen::Index i = 0; i < net.size(); ++i)
            w.row(net.bus_ids[i], s.mode.components(i), std::abs(s.mode.components(i)));
    }

    // DC consistency of the reduction on a fixed pseudo-random injection.
    std::mt19937_64 rng(cfg.seed);
    Eigen::VectorXd pg(net.size());
    for (Eigen::Index i = 0; i < pg.size(); ++i) pg(i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    pg.array() -= pg.mean();
    Eigen::VectorXd pfull = Eigen::VectorXd::Zero(s.full.matrix.rows());
    for (Eigen::Index i = 0; i < net.size(); ++i) pfull(s.full.index.at(net.bus_ids[i])) = pg(i);
    const auto ref_full = s.full.index.at(net.bus_ids[0]);
    const Eigen::VectorXd th_full = detail::grounded_solve(s.full.matrix, pfull, ref_full);
    const Eigen::VectorXd th_red = detail::grounded_solve(net.laplacian, pg, 0);
    double diff = 0.0, scale = 0.0;
    for (Eigen::Index i = 0; i < net.size(); ++i) {
        diff = std::max(diff, std::abs(th_full(s.full.index.at(net.bus_ids[i])) - th_red(i)));
        scale = std::max(scale, std::abs(th_red(i)));
    }
    const double dc_rel = diff / std::max(scale, 1e-300);
    const double row_sum = (net.laplacian * Eigen::VectorXd::Ones(net.size())).cwiseAbs().maxCoeff();
    const double lam_max = net.eigenvalues(net.size() - 1);

    nlohmann::json checks;
    checks["command"] = "reduce";
    checks["checks"] = nlohmann::json::array({
        {{"name", "kron dc consistency (relative)"}, {"value", dc_rel}, {"tolerance", 1e-9}, {"pass", dc_rel <= 1e-9}},
        {{"name", "reduced laplacian row sum (abs max)"},
         {"value", row_sum},
         {"tolerance", 1e-9 * lam_max},
         {"pass", row_sum <= 1e-9 * lam_max}},
        {{"name", "smallest eigenvalue (relative to largest)"},
         {"value", std::abs(net.eigenvalues(0)) / lam_max},
         {"tolerance", 1e-9},
         {"pass", std::abs(net.eigenvalues(0)) <= 1e-9 * lam_max}},
    });
    checks["fiedler"] = {{"eigenvalue", s.mode.eigenvalue}, {"degenerate", s.mode.degenerate}};
    if (s.mode.degenerate) checks["fiedler"]["warning"] = s.mode.warning;
    checks["retained_buses"] = net.bus_ids;
    checks["eliminated_buses"] = net.eliminated_ids;
    io::write_json(cfg.out_dir / "checks_reduce.json", checks);

    return {net.bus_ids.size(), net.eliminated_ids.size(), s.mode.eigenvalue, s.mode.degenerate};
}

// -------------------------------------------------------------- optimize

inline nlohmann::json settings_json(const SolverSettings& st) {
    return {{"step_rule", st.step_rule == StepRule::Fixed ? "fixed" : "barzilai-borwein"},
            {"initial_step", st.initial_step},
            {"backtrack", st.backtrack},
            {"armijo_c1", st.armijo_c1},
            {"rel_tol", st.rel_tol},
            {"pg_tol", st.pg_tol},
            {"max_iterations", st.max_iterations}};
}

/// Runs the allocation and writes allocation.json, allocation.csv,
/// iterations.csv and checks_optimize.json.
inline AllocationResult run_allocation(const Study& s, const StudyConfig& cfg) {
    const auto prob = study_problem(s, cfg.budget);
    const auto res = optimize_multistart(prob, cfg.starts, cfg.seed, cfg.parallel);
    fs::create_directories(cfg.out_dir);

    {
        io::CsvWriter w(cfg.out_dir / "iterations.csv", {"iter", "objective", "pg_norm", "step"});
        for (const auto& r : res.log) w.row(r.iteration, r.objective, r.pg_norm, r.step);
    }
    {
        io::CsvWriter w(cfg.out_dir / "allocation.csv", {"bus_id", "m_vi"});
        for (std::size_t c = 0; c < res.candidates.size(); ++c)
            w.row(res.candidates[c], res.vi_inertia(static_cast<Eigen::Index>(c)));
    }

    const Eigen::VectorXd uniform = uniform_allocation(prob);
    const double f_uniform = allocation_objective(prob, uniform);
    const double ws = s.gain;

    nlohmann::json alloc;
    alloc["budget_s"] = cfg.budget;
    nlohmann::json per_bus = nlohmann::json::array();
    for (std::size_t c = 0; c < res.candidates.size(); ++c) {
        const auto i = static_cast<Eigen::Index>(c);
        per_bus.push_back({{"bus_id", res.candidates[c]},
                           {"m_vi_s", res.vi_inertia(i)},
                           {"m_min_s", prob.bounds.lower(i)},
                           {"m_max_s", prob.bounds.upper(i)},
                           {"d_vi_pu", prob.vi_damping(i)}});
    }
    alloc["allocation"] = per_bus;
    alloc["objective_h2_squared"] = res.objective;
    alloc["objective_h2_norm"] = std::sqrt(res.objective);
    alloc["objective_h2_squared_rad"] = res.objective * ws * ws;
    alloc["initial_objective_h2_squared"] = res.initial_objective;
    alloc["uniform_objective_h2_squared"] = f_uniform;
    alloc["iterations"] = res.iterations;
    alloc["pg_norm"] = res.pg_norm;
    alloc["status"] = to_string(res.status);
    alloc["starts"] = cfg.starts;
    alloc["seed"] = cfg.seed;
    alloc["synchronizing_gain"] = ws;
    alloc["solver"] = settings_json(prob.settings);
    io::write_json(cfg.out_dir / "allocation.json", alloc);

    // Oracle checks at the returned point.
    const auto model = allocation_model(prob, res.vi_inertia);
    const auto ev = h2_evaluate(model, prob.output);
    const Eigen::VectorXd grad = h2_gradient(model, prob.output, prob.candidates);
    const Eigen::VectorXd fd = oracle::fd_gradient(prob, res.vi_inertia);
    double fd_err = 0.0;
    for (Eigen::Index c = 0; c < grad.size(); ++c)
        fd_err = std::max(fd_err, std::abs(fd(c) - grad(c)) / std::max(std::abs(grad(c)), 1e-300));
    const Eigen::VectorXd y = res.vi_inertia - grad;
    const auto kkt = projection_kkt(y, project_feasible(y, prob.bounds), prob.bounds);
    const double sum_err = std::abs(res.vi_inertia.sum() - cfg.budget);

    nlohmann::json checks;
    checks["command"] = "optimize";
    checks["checks"] = nlohmann::json::array({
        {{"name", "lyapunov residual (relative)"},
         {"value", ev.relative_residual},
         {"tolerance", 1e-10},
         {"pass", ev.relative_residual <= 1e-10}},
        {{"name", "gradient vs extended-precision differences (relative)"},
         {"value", fd_err},
         {"tolerance", 1e-5},
         {"pass", fd_err <= 1e-5}},
        {{"name", "projection kkt residual"},
         {"value", kkt.residual},
         {"tolerance", 1e-9},
         {"pass", kkt.residual <= 1e-9}},
        {{"name", "budget equality"},
         {"value", sum_err},
         {"tolerance", 1e-9 * std::max(1.0, cfg.budget)},
         {"pass", sum_err <= 1e-9 * std::max(1.0, cfg.budget)}},
        {{"name", "optimized <= uniform objective"},
         {"value", res.objective - f_uniform},
         {"tolerance", 0.0},
         {"pass", res.objective <= f_uniform}},
    });
    checks["status"] = to_string(res.status);
    checks["pg_norm"] = res.pg_norm;
    io::write_json(cfg.out_dir / "checks_optimize.json", checks);
    return res;
}

inline AllocationResult cmd_optimize(const StudyConfig& cfg) {
    validate_config(cfg);
    return run_allocation(load_study(cfg), cfg);
}

// -------------------------------------------------------------- simulate

struct ScenarioResult {
    std::string name;
    std::vector<ViDevice> devices;
    Metrics metrics;
    double balance_residual = 0.0; // worst relative power-balance mismatch
};

namespace detail {

/// sum(m_cl * omega_dot + d_cl * omega) must equal the total injection at
/// every sample, since the coupling sums to zero.
inline double balance_residual(const ClosedLoopModel& model, const std::vector<StepEvent>& events,
                               const ResponseTrace& tr) {
    double worst = 0.0, scale = 0.0;
    for (const auto& e : events) scale += std::abs(e.dp_pu);
    if (scale == 0.0) scale = 1.0;
    for (Eigen::Index k = 0; k < tr.samples(); ++k) {
        const double total = injection_at(model, events, tr.time(k)).sum();
        const double lhs = tr.omega_dot.row(k).dot(model.m_cl) + tr.omega.row(k).dot(model.d_cl);
        worst = std::max(worst, std::abs(lhs - total) / scale);
    }
    return worst;
}

inline nlohmann::json metrics_json(const std::string& scenario, const Metrics& m, const std::vector<ViDevice>& devs) {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["rocof_window"] = m.rocof_window_s;
    j["nominal_hz"] = m.nominal_hz;
    j["t_disturbance_s"] = m.t_disturbance;
    j["avg_rocof_windowed_hz_per_s"] = m.avg_rocof_windowed;
    j["avg_rocof_instant_hz_per_s"] = m.avg_rocof_instant;
    j["max_abs_rocof_windowed_hz_per_s"] = m.max_abs_rocof_windowed;
    j["max_abs_rocof_instant_hz_per_s"] = m.max_abs_rocof_instant;
    j["avg_nadir_hz"] = m.avg_nadir_hz;
    j["min_nadir_hz"] = m.min_nadir_hz;
    j["avg_time_to_nadir_s"] = m.avg_time_to_nadir_s;
    nlohmann::json buses = nlohmann::json::array();
    for (std::size_t i = 0; i < m.bus_ids.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        buses.push_back({{"bus_id", m.bus_ids[i]},
                         {"rocof_windowed_hz_per_s", m.rocof_windowed(k)},
                         {"rocof_instant_hz_per_s", m.rocof_instant(k)},
                         {"nadir_hz", m.nadir_hz(k)},
                         {"time_to_nadir_s", m.time_to_nadir_s(k)}});
    }
    j["buses"] = buses;
    nlohmann::json dj = nlohmann::json::array();
    double total = 0.0;
    for (const auto& d : devs) {
        dj.push_back({{"bus_id", d.bus}, {"m_vi_s", d.inertia_s}, {"d_vi_pu", d.damping_pu}});
        total += d.inertia_s;
    }
    j["devices"] = dj;
    j["total_vi_inertia_s"] = total;
    return j;
}

inline void write_trace(const fs::path& dir, const ResponseTrace& tr, double nominal_hz) {
    {
        io::CsvWriter w(dir / "trace.csv", {"t", "bus_id", "theta_rad", "omega_pu", "freq_hz"});
        for (Eigen::Index k = 0; k < tr.samples(); ++k)
            for (std::size_t i = 0; i < tr.bus_ids.size(); ++i) {
                const auto c = static_cast<Eigen::Index>(i);
                w.row(tr.time(k), tr.bus_ids[i], tr.theta(k, c), tr.omega(k, c),
                      nominal_hz * (1.0 + tr.omega(k, c)));
            }
    }
    io::CsvWriter w(dir / "devices.csv", {"t", "bus_id", "p_vi_pu"});
    for (Eigen::Index k = 0; k < tr.samples(); ++k)
        for (std::size_t j = 0; j < tr.device_buses.size(); ++j)
            w.row(tr.time(k), tr.device_buses[j], tr.p_vi(k, static_cast<Eigen::Index>(j)));
}

inline std::string fmt_fixed(double v, int digits) {
    if (std::abs(v) < 0.5 * std::pow(10.0, -digits)) v = 0.0;
    return fmt::format("{:.{}f}", v, digits);
}

inline std::string comparison_markdown(const std::vector<ScenarioResult>& rs) {
    static const std::map<std::string, std::string> label{
        {"base", "No VI"}, {"unopt", "No optimized VI"}, {"opt", "Optimized VI"}};
    std::string md = "| Case | Average RoCoF [Hz/s] | Frequency nadir [Hz] | Time to nadir [s] |\n";
    md += "|---|---|---|---|\n";
    for (const auto& r : rs)
        md += fmt::format("| {} | {} | {} | {} |\n", label.at(r.name), fmt_fixed(r.metrics.avg_rocof_windowed, 4),
                          fmt_fixed(r.metrics.avg_nadir_hz, 4), fmt_fixed(r.metrics.avg_time_to_nadir_s, 2));
    return md;
}

} // namespace detail

struct SimulateSummary {
    std::vector<ScenarioResult> scenarios;
    std::optional<AllocationResult> allocation;
    std::string comparison;
};

inline SimulateSummary cmd_simulate(const StudyConfig& cfg) {
    validate_config(cfg);
    const Study s = load_study(cfg);
    fs::create_directories(cfg.out_dir);

    std::vector<std::string> names;
    for (const auto& n : kScenarios)
        if (cfg.scenario == "all" || cfg.scenario == n) names.push_back(n);

    const auto prob = study_problem(s, cfg.budget);
    SimulateSummary out;
    if (std::find(names.begin(), names.end(), "opt") != names.end()) out.allocation = run_allocation(s, cfg);

    const auto events = step_events(s.net, s.grid.disturbances);

    const auto run = [&](const std::string& name) {
        ScenarioResult r;
        r.name = name;
        if (name == "unopt") r.devices = allocation_devices(prob, uniform_allocation(prob));
        if (name == "opt") r.devices = allocation_devices(prob, out.allocation->vi_inertia);
        const auto model = assemble(s.net, prob.inertia, prob.damping, r.devices, prob.disturbance_scaling, s.gain);
        const auto tr = cfg.model == "linear" ? simulate_linear(model, events, cfg.horizon, cfg.dt)
                                              : simulate_nonlinear(model, events, cfg.horizon, cfg.dt);
        r.metrics = metrics(tr, s.grid.nominal_hz, cfg.rocof_window);
        r.balance_residual = detail::balance_residual(model, events, tr);
        const fs::path dir = cfg.out_dir / name;
        fs::create_directories(dir);
        detail::write_trace(dir, tr, s.grid.nominal_hz);
        io::write_json(dir / "metrics.json", detail::metrics_json(name, r.metrics, r.devices));
        return r;
    };

    if (cfg.parallel && names.size() > 1) {
        std::vector<std::future<ScenarioResult>> fut;
        for (const auto& n : names) fut.push_back(std::async(std::launch::async, run, n));
        for (auto& f : fut) out.scenarios.push_back(f.get());
    } else {
        for (const auto& n : names) out.scenarios.push_back(run(n));
    }

    {
        io::CsvWriter w(cfg.out_dir / "comparison.csv",
                        {"scenario", "avg_rocof_hz_per_s", "avg_rocof_instant_hz_per_s", "avg_nadir_hz",
                         "min_nadir_hz", "avg_time_to_nadir_s"});
        for (const auto& r : out.scenarios)
            w.row(r.name, r.metrics.avg_rocof_windowed, r.metrics.avg_rocof_instant, r.metrics.avg_nadir_hz,
                  r.metrics.min_nadir_hz, r.metrics.avg_time_to_nadir_s);
    }
    out.comparison = detail::comparison_markdown(out.scenarios);
    io::write_text(cfg.out_dir / "comparison.md", out.comparison);

    nlohmann::json checks;
    checks["command"] = "simulate";
    checks["model"] = cfg.model;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : out.scenarios)
        list.push_back({{"name", "power balance (" + r.name + ", relative)"},
                        {"value", r.balance_residual},
                        {"tolerance", 1e-9},
                        {"pass", r.balance_residual <= 1e-9}});
    checks["checks"] = list;
    io::write_json(cfg.out_dir / "checks_simulate.json", checks);
    return out;
}

// ---------------------------------------------------------------- report

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot read " + p.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline std::vector<std::pair<std::string, double>> ranked(const std::vector<std::vector<std::string>>& rows,
                                                          std::size_t col) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& r : rows) {
        if (r.size() <= col) throw InputError("malformed csv row");
        out.emplace_back(r[0], std::stod(r[col]));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

} // namespace detail

struct ReportSummary {
    fs::path path;
    std::vector<std::string> missing;
};

/// Consolidates prior outputs in `dir` into report.md. Missing artifacts are
/// listed in the report; if none of them exist the call fails.
inline ReportSummary cmd_report(const fs::path& dir) {
    ReportSummary rep;
    const auto has = [&](const fs::path& rel) {
        if (fs::exists(dir / rel)) return true;
        rep.missing.push_back(rel.generic_string());
        return false;
    };

    std::vector<std::string> present_scn;
    for (const auto& n : kScenarios)
        if (has(fs::path(n) / "metrics.json")) present_scn.push_back(n);
    const bool have_fiedler = has("fiedler.csv");
    const bool have_alloc = has("allocation.csv");
    const bool have_alloc_json = has("allocation.json");
    std::vector<std::string> check_files;
    for (const char* f : {"checks_reduce.json", "checks_simulate.json", "checks_optimize.json"})
        if (has(f)) check_files.push_back(f);

    if (present_scn.empty() && !have_fiedler && !have_alloc && !have_alloc_json && check_files.empty()) {
        std::string msg = "report: no study outputs in " + dir.string() + "; missing:";
        for (const auto& m : rep.missing) msg += " " + m;
        throw InputError(msg);
    }

    const auto gap = [](const std::string& what) { return "_Not available: " + what + " is missing._\n"; };
    std::string md = "# Virtual inertia study report\n\n";

    md += "## Scenario comparison\n\n";
    if (present_scn.empty()) {
        md += gap("scenario metrics (run `simulate`)");
    } else {
        std::vector<ScenarioResult> rs;
        for (const auto& n : present_scn) {
            const auto j = io::read_json(dir / n / "metrics.json");
            ScenarioResult r;
            r.name = n;
            r.metrics.avg_rocof_windowed = j.at("avg_rocof_windowed_hz_per_s").get<double>();
            r.metrics.avg_nadir_hz = j.at("avg_nadir_hz").get<double>();
            r.metrics.avg_time_to_nadir_s = j.at("avg_time_to_nadir_s").get<double>();
            r.metrics.rocof_window_s = j.at("rocof_window").get<double>();
            rs.push_back(r);
        }
        md += detail::comparison_markdown(rs);
        md += fmt::format("\nRoCoF is the slope of bus frequency over {} s after the disturbance, averaged over "
                          "generator buses.\n",
                          io::num(rs.front().metrics.rocof_window_s));
        for (const auto& n : kScenarios)
            if (std::find(present_scn.begin(), present_scn.end(), n) == present_scn.end())
                md += gap("scenario `" + n + "`");
    }

    md += "\n## Fiedler ranking\n\n";
    if (!have_fiedler) {
        md += gap("fiedler.csv (run `reduce`)");
    } else {
        md += "| Rank | Bus | abs(u2) |\n|---|---|---|\n";
        int k = 1;
        for (const auto& [bus, v] : detail::ranked(detail::read_csv(dir / "fiedler.csv"), 2))
            md += fmt::format("| {} | {} | {} |\n", k++, bus, detail::fmt_fixed(v, 4));
    }

    md += "\n## Allocation ranking\n\n";
    if (!have_alloc) {
        md += gap("allocation.csv (run `optimize`)");
    } else {
        md += "| Rank | Bus | m_vi [s] |\n|---|---|---|\n";
        int k = 1;
        for (const auto& [bus, v] : detail::ranked(detail::read_csv(dir / "allocation.csv"), 1))
            md += fmt::format("| {} | {} | {} |\n", k++, bus, detail::fmt_fixed(v, 4));
        if (have_alloc_json) {
            const auto j = io::read_json(dir / "allocation.json");
            md += fmt::format("\nSolver status `{}` after {} iterations, projected-gradient norm {}, objective {} "
                              "(uniform split {}).\n",
                              j.at("status").get<std::string>(), j.at("iterations").get<int>(),
                              io::num(j.at("pg_norm").get<double>()),
                              io::num(j.at("objective_h2_squared").get<double>()),
                              io::num(j.at("uniform_objective_h2_squared").get<double>()));
        }
    }

    md += "\n## Oracle checks\n\n";
    if (check_files.empty()) {
        md += gap("checks_*.json");
    } else {
        md += "| Command | Check | Value | Tolerance | Result |\n|---|---|---|---|---|\n";
        for (const auto& f : check_files) {
            const auto j = io::read_json(dir / f);
            for (const auto& c : j.at("checks"))
                md += fmt::format("| {} | {} | {} | {} | {} |\n", j.at("command").get<std::string>(),
                                  c.at("name").get<std::string>(), io::num(c.at("value").get<double>()),
                                  io::num(c.at("tolerance").get<double>()), c.at("pass").get<bool>() ? "pass" : "FAIL");
        }
    }

    if (!rep.missing.empty()) {
        md += "\n## Missing artifacts\n\n";
        for (const auto& m : rep.missing) md += "- `" + m + "`\n";
    }

    rep.path = dir / "report.md";
    io::write_text(rep.path, md);
    return rep;
}

} // namespace gridvi
