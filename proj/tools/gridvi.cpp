// gridvi: command-line front end for reduce / simulate / optimize / report.
//
// Exit codes: 0 ok, 2 input or schema error, 3 infeasible or solver error,
// 4 numerical failure.

#include <cstdio>
#include <iostream>
#include <istream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <gridvi/gridvi.hpp>

namespace {

enum Exit { kOk = 0, kInput = 2, kInfeasible = 3, kNumerical = 4 };

// Study configs may be TOML or a flat JSON object; both use the long flag
// names as keys.
class StudyConfigFormat : public CLI::ConfigTOML {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream again(text);
            return CLI::ConfigTOML::from_config(again);
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ParseError(std::string("study config: ") + e.what(), CLI::ExitCodes::InvalidError);
        }
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            CLI::ConfigItem item;
            item.name = key;
            const auto scalar = [](const nlohmann::json& v) {
                if (v.is_string()) return v.get<std::string>();
                if (v.is_structured()) throw CLI::ParseError("study config: nested values are not supported",
                                                             CLI::ExitCodes::InvalidError);
                return v.dump();
            };
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
        return items;
    }
};

void print_allocation(const gridvi::AllocationResult& r) {
    fmt::print("status {} after {} iterations, pg_norm {}, objective {}\n", gridvi::to_string(r.status),
               r.iterations, gridvi::io::num(r.pg_norm), gridvi::io::num(r.objective));
    for (std::size_t c = 0; c < r.candidates.size(); ++c)
        fmt::print("  bus {:>4}  m_vi {}\n", r.candidates[c],
                   gridvi::io::num(r.vi_inertia(static_cast<Eigen::Index>(c))));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual inertia placement studies on Kron-reduced power networks"};
    app.config_formatter(std::make_shared<StudyConfigFormat>());
    app.set_config("--config", "", "Study config file (TOML or JSON, keys as the long flags)");
    app.require_subcommand(1);

    gridvi::StudyConfig cfg;
    std::string case_path, out_dir = cfg.out_dir.string();
    std::vector<std::string> disturbances;
    bool sequential = false;

    app.add_option("--case", case_path, "Case file (JSON)");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--budget", cfg.budget, "Virtual inertia budget in seconds")->capture_default_str();
    app.add_option("--disturbance", disturbances, "Step disturbance BUS:DP_PU[:T0]; repeatable, replaces the case list");
    app.add_option("--rocof-window", cfg.rocof_window, "RoCoF measurement window in seconds")->capture_default_str();
    app.add_option("--horizon", cfg.horizon, "Simulation horizon in seconds")->capture_default_str();
    app.add_option("--dt", cfg.dt, "Output sample step in seconds")->capture_default_str();
    app.add_option("--starts", cfg.starts, "Optimizer starts (uniform start plus random feasible ones)")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Seed for random starts")->capture_default_str();
    app.add_option("--scenario", cfg.scenario, "Scenarios to simulate")
        ->check(CLI::IsMember({"base", "unopt", "opt", "all"}))
        ->capture_default_str();
    app.add_option("--model", cfg.model, "Simulation model")
        ->check(CLI::IsMember({"linear", "nonlinear"}))
        ->capture_default_str();
    app.add_flag("--sequential", sequential, "Run scenarios and starts one after another");

    auto* reduce = app.add_subcommand("reduce", "Kron-reduce the case; write spectrum.csv and fiedler.csv");
    auto* simulate = app.add_subcommand("simulate", "Simulate base / unopt / opt scenarios");
    auto* optimize = app.add_subcommand("optimize", "Optimize the virtual inertia allocation");
    auto* report = app.add_subcommand("report", "Consolidate outputs in --out into report.md");
    for (auto* sub : {reduce, simulate, optimize, report}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        cfg.case_path = case_path;
        cfg.out_dir = out_dir;
        cfg.parallel = !sequential;
        if (!disturbances.empty()) {
            cfg.disturbances.emplace();
            for (const auto& d : disturbances) cfg.disturbances->push_back(gridvi::parse_disturbance(d));
        }

        if (reduce->parsed()) {
            if (case_path.empty()) throw gridvi::InputError("reduce: --case is required");
            const auto r = gridvi::cmd_reduce(cfg);
            fmt::print("{} retained buses, {} eliminated, lambda_2 = {}{}\n", r.retained, r.eliminated,
                       gridvi::io::num(r.fiedler_value), r.degenerate ? " (degenerate)" : "");
            if (r.degenerate) fmt::print(stderr, "warning: Fiedler eigenvalue is degenerate\n");
        } else if (simulate->parsed()) {
            const auto r = gridvi::cmd_simulate(cfg);
            if (r.allocation) print_allocation(*r.allocation);
            fmt::print("{}", r.comparison);
        } else if (optimize->parsed()) {
            print_allocation(gridvi::cmd_optimize(cfg));
        } else if (report->parsed()) {
            const auto r = gridvi::cmd_report(cfg.out_dir);
            fmt::print("wrote {}\n", r.path.string());
            for (const auto& m : r.missing) fmt::print(stderr, "missing: {}\n", m);
        }
    } catch (const gridvi::InputError& e) {
        fmt::print(stderr, "input error: {}\n", e.what());
        return kInput;
    } catch (const gridvi::InfeasibleError& e) {
        fmt::print(stderr, "infeasible: {}\n", e.what());
        return kInfeasible;
    } catch (const gridvi::NumericalError& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return kNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "input error: {}\n", e.what());
        return kInput;
    } catch (const std::exception& e) {
        fmt::print(stderr, "internal error: {}\n", e.what());
        return kNumerical;
    }
    return kOk;
}
