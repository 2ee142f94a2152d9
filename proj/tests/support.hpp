#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <gridvi/gridvi.hpp>

#ifndef GRIDVI_DATA_DIR
#error "GRIDVI_DATA_DIR must be defined"
#endif

namespace testing_support {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(GRIDVI_DATA_DIR) / name;
}

inline const gridvi::GridCase& rts24() {
    static const gridvi::GridCase c = gridvi::parse_case(data_path("rts24.json"));
    return c;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

struct Edge {
    int from;
    int to;
    double b;
};

/// Laplacian over buses 1..n from an edge list (unit voltages).
inline gridvi::Laplacian laplacian_from_edges(int n, const std::vector<Edge>& edges) {
    gridvi::Laplacian lap;
    lap.matrix = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        lap.bus_ids.push_back(i + 1);
        lap.index[i + 1] = i;
    }
    for (const auto& e : edges) {
        const int i = e.from - 1, k = e.to - 1;
        lap.matrix(i, k) -= e.b;
        lap.matrix(k, i) -= e.b;
        lap.matrix(i, i) += e.b;
        lap.matrix(k, k) += e.b;
    }
    return lap;
}

inline gridvi::ReducedNetwork network_from_edges(int n, const std::vector<Edge>& edges) {
    return gridvi::kron_reduce(laplacian_from_edges(n, edges), {});
}

/// Random connected graph: random spanning tree plus extra edges.
inline std::vector<Edge> random_connected_edges(std::mt19937_64& rng, int n, int extra) {
    std::vector<Edge> edges;
    for (int v = 2; v <= n; ++v) {
        const int u = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(v - 1));
        edges.push_back({u, v, uniform(rng, 0.5, 5.0)});
    }
    for (int k = 0; k < extra; ++k) {
        const int a = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        const int b = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        if (a != b) edges.push_back({a, b, uniform(rng, 0.5, 5.0)});
    }
    return edges;
}

/// Random connected case with `passive` passive buses and one VI candidate
/// per generator bus.
inline gridvi::GridCase random_case(std::mt19937_64& rng, int n, int passive, double m_max = 2.0) {
    gridvi::GridCase c;
    c.base_mva = 100.0;
    c.nominal_hz = 60.0;
    for (int i = 1; i <= n; ++i)
        c.buses.push_back({i, i <= n - passive ? gridvi::BusKind::Generator : gridvi::BusKind::Passive,
                           uniform(rng, 0.95, 1.05)});
    for (const auto& e : random_connected_edges(rng, n, n / 2)) {
        int ckt = 1;
        for (const auto& br : c.branches)
            if (std::min(br.from, br.to) == std::min(e.from, e.to) && std::max(br.from, br.to) == std::max(e.from, e.to))
                ckt = std::max(ckt, br.circuit + 1);
        c.branches.push_back({e.from, e.to, e.b, ckt});
    }
    for (int i = 1; i <= n - passive; ++i) {
        c.generators.push_back({i, uniform(rng, 2.0, 6.0), uniform(rng, 50.0, 300.0), uniform(rng, 5.0, 25.0)});
        c.vi_candidates.push_back({i, 0.0, m_max, uniform(rng, 0.1, 1.0)});
    }
    gridvi::validate_case(c);
    return c;
}

inline gridvi::ReducedNetwork reduce(const gridvi::GridCase& c) {
    return gridvi::kron_reduce(c, gridvi::build_laplacian(c));
}

} // namespace testing_support
