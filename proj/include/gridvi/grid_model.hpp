#pragma once

// Grid data model: case-file parsing and validation, network Laplacian,
// aggregate inertia quantities.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gridvi/errors.hpp"

namespace gridvi {

using BusId = int;

enum class BusKind { Generator, Passive };

struct Generator {
    BusId bus = 0;
    double inertia_s = 0.0;   // H_i on machine base
    double rated_mva = 0.0;   // S_Bi
    double damping_pu = 0.0;  // d_i on machine base
};

struct Bus {
    BusId id = 0;
    BusKind kind = BusKind::Passive;
    double voltage_pu = 1.0;
    // Aggregated over the bus's generators, system base: m_i = sum 2 H S_Bi / S_B.
    double inertia_s = 0.0;
    double damping_pu = 0.0;
};

struct Branch {
    BusId from = 0;
    BusId to = 0;
    double susceptance_pu = 0.0;
    int circuit = 1;
};

struct ViCandidate {
    BusId bus = 0;
    double m_min_s = 0.0;  // bounds on the virtual part of the nodal inertia
    double m_max_s = 0.0;
    double d_vi_pu = 0.0;
};

struct Disturbance {
    BusId bus = 0;
    double dp_pu = 0.0;
    double t_start_s = 0.0;
};

struct GridCase {
    double base_mva = 100.0;
    double nominal_hz = 60.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<ViCandidate> vi_candidates;
    std::vector<Disturbance> disturbances;
    nlohmann::json provenance;

    [[nodiscard]] const Bus* find_bus(BusId id) const {
        auto it = std::find_if(buses.begin(), buses.end(), [id](const Bus& b) { return b.id == id; });
        return it == buses.end() ? nullptr : &*it;
    }

    [[nodiscard]] std::vector<BusId> generator_buses() const {
        std::vector<BusId> out;
        for (const auto& b : buses)
            if (b.kind == BusKind::Generator) out.push_back(b.id);
        return out;
    }

    [[nodiscard]] std::vector<BusId> passive_buses() const {
        std::vector<BusId> out;
        for (const auto& b : buses)
            if (b.kind == BusKind::Passive) out.push_back(b.id);
        return out;
    }
};

/// Dense Laplacian over all buses, rows ordered as `bus_ids`.
struct Laplacian {
    Eigen::MatrixXd matrix;
    std::vector<BusId> bus_ids;
    std::map<BusId, Eigen::Index> index;
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    if (!obj.is_object()) throw InputError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) throw InputError(where + ": unknown key '" + key + "'");
    }
}

inline double number(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw InputError(where + ": missing key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw InputError(where + ": key '" + key + "' must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw InputError(where + ": key '" + key + "' is not finite");
    return x;
}

inline double number_or(const nlohmann::json& obj, const char* key, double fallback,
                        const std::string& where) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline int integer(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw InputError(where + ": missing key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw InputError(where + ": key '" + key + "' must be an integer");
    return v.get<int>();
}

inline const nlohmann::json& array(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key)) throw InputError(std::string("case: missing key '") + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_array()) throw InputError(std::string("case: '") + key + "' must be an array");
    return v;
}

inline std::string bus_tag(BusId id) { return "bus " + std::to_string(id); }

} // namespace detail

/// Checks invariants and fills the per-bus aggregate inertia and damping.
/// Multiple generators on one bus are summed.
inline void validate_case(GridCase& c) {
    if (!(c.base_mva > 0.0)) throw InputError("system: base_mva must be positive");
    if (!(c.nominal_hz > 0.0)) throw InputError("system: nominal_hz must be positive");
    if (c.buses.empty()) throw InputError("case: no buses");

    std::map<BusId, std::size_t> pos;
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        auto& b = c.buses[i];
        if (!pos.emplace(b.id, i).second) throw InputError("duplicate bus id " + std::to_string(b.id));
        if (!(b.voltage_pu > 0.0)) throw InputError(detail::bus_tag(b.id) + ": v_pu must be positive");
        b.inertia_s = 0.0;
        b.damping_pu = 0.0;
    }

    std::set<std::tuple<BusId, BusId, int>> seen;
    for (const auto& br : c.branches) {
        std::string tag = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
        if (!pos.count(br.from) || !pos.count(br.to))
            throw InputError(tag + ": dangling branch endpoint");
        if (br.from == br.to) throw InputError(tag + ": self-loop");
        if (!(br.susceptance_pu > 0.0)) throw InputError(tag + ": b_pu must be positive");
        auto key = std::make_tuple(std::min(br.from, br.to), std::max(br.from, br.to), br.circuit);
        if (!seen.insert(key).second)
            throw InputError(tag + ": duplicate branch (circuit " + std::to_string(br.circuit) + ")");
    }

    for (const auto& g : c.generators) {
        std::string tag = "generator at " + detail::bus_tag(g.bus);
        auto it = pos.find(g.bus);
        if (it == pos.end()) throw InputError(tag + ": dangling generator bus reference");
        if (g.inertia_s < 0.0) throw InputError(tag + ": h_s must be >= 0");
        if (!(g.rated_mva > 0.0)) throw InputError(tag + ": s_mva must be positive");
        if (g.damping_pu < 0.0) throw InputError(tag + ": d_pu must be >= 0");
        auto& b = c.buses[it->second];
        if (b.kind != BusKind::Generator)
            throw InputError(tag + ": generator attached to a passive bus");
        b.inertia_s += 2.0 * g.inertia_s * g.rated_mva / c.base_mva;
        b.damping_pu += g.damping_pu * g.rated_mva / c.base_mva;
    }

    bool any_gen = false;
    for (const auto& b : c.buses) {
        if (b.kind == BusKind::Generator) {
            any_gen = true;
            if (!(b.inertia_s > 0.0))
                throw InputError(detail::bus_tag(b.id) + ": generator bus without positive inertia");
        }
    }
    if (!any_gen) throw InputError("case: at least one generator bus is required");

    std::set<BusId> cand_seen;
    for (const auto& v : c.vi_candidates) {
        std::string tag = "vi_candidate at " + detail::bus_tag(v.bus);
        auto it = pos.find(v.bus);
        if (it == pos.end()) throw InputError(tag + ": dangling candidate bus reference");
        if (c.buses[it->second].kind != BusKind::Generator)
            throw InputError(tag + ": candidate must be a generator bus");
        if (!cand_seen.insert(v.bus).second) throw InputError(tag + ": duplicate candidate");
        if (v.m_min_s < 0.0 || v.m_max_s < v.m_min_s)
            throw InputError(tag + ": require 0 <= m_min_s <= m_max_s");
        if (v.d_vi_pu < 0.0) throw InputError(tag + ": d_vi_pu must be >= 0");
    }

    for (const auto& d : c.disturbances) {
        std::string tag = "disturbance at " + detail::bus_tag(d.bus);
        auto it = pos.find(d.bus);
        if (it == pos.end()) throw InputError(tag + ": dangling disturbance bus reference");
        if (d.t_start_s < 0.0) throw InputError(tag + ": t_start_s must be >= 0");
    }

    // Connectivity by BFS from the first bus.
    std::map<BusId, std::vector<BusId>> adj;
    for (const auto& br : c.branches) {
        adj[br.from].push_back(br.to);
        adj[br.to].push_back(br.from);
    }
    std::set<BusId> reached{c.buses.front().id};
    std::queue<BusId> todo;
    todo.push(c.buses.front().id);
    while (!todo.empty()) {
        BusId u = todo.front();
        todo.pop();
        for (BusId v : adj[u])
            if (reached.insert(v).second) todo.push(v);
    }
    if (reached.size() != c.buses.size()) {
        std::string missing;
        for (const auto& b : c.buses)
            if (!reached.count(b.id)) missing += (missing.empty() ? "" : ", ") + std::to_string(b.id);
        throw InputError("case: disconnected graph, unreachable buses: " + missing);
    }
}

inline GridCase parse_case_json(const nlohmann::json& j) {
    using detail::array;
    detail::check_keys(j, {"system", "buses", "branches", "generators", "vi_candidates", "disturbances",
                           "provenance"},
                       "case");
    GridCase c;
    if (!j.contains("system")) throw InputError("case: missing key 'system'");
    const auto& sys = j.at("system");
    detail::check_keys(sys, {"base_mva", "nominal_hz"}, "system");
    c.base_mva = detail::number(sys, "base_mva", "system");
    c.nominal_hz = detail::number(sys, "nominal_hz", "system");
    if (j.contains("provenance")) c.provenance = j.at("provenance");

    for (const auto& b : array(j, "buses")) {
        detail::check_keys(b, {"id", "kind", "v_pu"}, "bus");
        Bus bus;
        bus.id = detail::integer(b, "id", "bus");
        std::string where = detail::bus_tag(bus.id);
        if (!b.contains("kind") || !b.at("kind").is_string()) throw InputError(where + ": missing string 'kind'");
        auto kind = b.at("kind").get<std::string>();
        if (kind == "generator")
            bus.kind = BusKind::Generator;
        else if (kind == "passive")
            bus.kind = BusKind::Passive;
        else
            throw InputError(where + ": kind must be 'generator' or 'passive', got '" + kind + "'");
        bus.voltage_pu = detail::number_or(b, "v_pu", 1.0, where);
        c.buses.push_back(bus);
    }
    for (const auto& b : array(j, "branches")) {
        detail::check_keys(b, {"from", "to", "b_pu", "ckt"}, "branch");
        Branch br;
        br.from = detail::integer(b, "from", "branch");
        br.to = detail::integer(b, "to", "branch");
        br.susceptance_pu = detail::number(b, "b_pu", "branch");
        br.circuit = b.contains("ckt") ? detail::integer(b, "ckt", "branch") : 1;
        c.branches.push_back(br);
    }
    for (const auto& g : array(j, "generators")) {
        detail::check_keys(g, {"bus", "h_s", "s_mva", "d_pu"}, "generator");
        Generator gen;
        gen.bus = detail::integer(g, "bus", "generator");
        std::string where = "generator at " + detail::bus_tag(gen.bus);
        gen.inertia_s = detail::number(g, "h_s", where);
        gen.rated_mva = detail::number(g, "s_mva", where);
        gen.damping_pu = detail::number(g, "d_pu", where);
        c.generators.push_back(gen);
    }
    if (j.contains("vi_candidates")) {
        for (const auto& v : array(j, "vi_candidates")) {
            detail::check_keys(v, {"bus", "m_min_s", "m_max_s", "d_vi_pu"}, "vi_candidate");
            ViCandidate cand;
            cand.bus = detail::integer(v, "bus", "vi_candidate");
            std::string where = "vi_candidate at " + detail::bus_tag(cand.bus);
            cand.m_min_s = detail::number(v, "m_min_s", where);
            cand.m_max_s = detail::number(v, "m_max_s", where);
            cand.d_vi_pu = detail::number(v, "d_vi_pu", where);
            c.vi_candidates.push_back(cand);
        }
    }
    if (j.contains("disturbances")) {
        for (const auto& d : array(j, "disturbances")) {
            detail::check_keys(d, {"bus", "dp_pu", "t_start_s"}, "disturbance");
            Disturbance dist;
            dist.bus = detail::integer(d, "bus", "disturbance");
            std::string where = "disturbance at " + detail::bus_tag(dist.bus);
            dist.dp_pu = detail::number(d, "dp_pu", where);
            dist.t_start_s = detail::number_or(d, "t_start_s", 0.0, where);
            c.disturbances.push_back(dist);
        }
    }
    validate_case(c);
    return c;
}

/// Reads and validates a JSON case file.
inline GridCase parse_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open case file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("case file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_case_json(j);
}

/// l_ij = -b_ij V_i V_j, l_ii = sum_j b_ij V_i V_j. Parallel circuits add.
inline Laplacian build_laplacian(const GridCase& c) {
    Laplacian lap;
    const auto n = static_cast<Eigen::Index>(c.buses.size());
    lap.matrix = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lap.bus_ids.push_back(c.buses[i].id);
        lap.index[c.buses[i].id] = i;
    }
    for (const auto& br : c.branches) {
        Eigen::Index i = lap.index.at(br.from);
        Eigen::Index k = lap.index.at(br.to);
        double w = br.susceptance_pu * c.buses[i].voltage_pu * c.buses[k].voltage_pu;
        lap.matrix(i, k) -= w;
        lap.matrix(k, i) -= w;
        lap.matrix(i, i) += w;
        lap.matrix(k, k) += w;
    }
    return lap;
}

struct SystemInertia {
    double stored_energy_mws = 0.0;  // E_sys
    double inertia_constant_s = 0.0; // H_sys
};

inline SystemInertia system_inertia(const GridCase& c) {
    if (c.generators.empty()) throw InputError("system_inertia: case has no generators");
    SystemInertia s;
    for (const auto& g : c.generators) s.stored_energy_mws += g.inertia_s * g.rated_mva;
    s.inertia_constant_s = s.stored_energy_mws / c.base_mva;
    return s;
}

/// Aggregate RoCoF in Hz/s for an active power change `delta_p_mw`.
inline double aggregate_rocof(const GridCase& c, double delta_p_mw) {
    const double h_sys = system_inertia(c).inertia_constant_s;
    if (!(h_sys > 0.0)) throw InputError("aggregate_rocof: zero system inertia");
    return -delta_p_mw * c.nominal_hz / (2.0 * h_sys * c.base_mva);
}

} // namespace gridvi
