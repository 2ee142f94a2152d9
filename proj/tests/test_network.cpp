#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support.hpp"

using namespace gridvi;
using testing_support::Edge;

namespace {

nlohmann::json two_bus_json() {
    return nlohmann::json::parse(R"({
        "system": {"base_mva": 100, "nominal_hz": 60},
        "buses": [{"id": 1, "kind": "generator"}, {"id": 2, "kind": "generator", "v_pu": 1.0}],
        "branches": [{"from": 1, "to": 2, "b_pu": 0.5}],
        "generators": [{"bus": 1, "h_s": 4, "s_mva": 100, "d_pu": 1},
                       {"bus": 2, "h_s": 4, "s_mva": 100, "d_pu": 1}]
    })");
}

std::string error_of(const nlohmann::json& j) {
    try {
        parse_case_json(j);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

} // namespace

// ------------------------------------------------------------ parsing

TEST(ParseCase, BundledRts24HasPublishedSize) {
    const auto& c = testing_support::rts24();
    EXPECT_EQ(c.buses.size(), 24u);
    EXPECT_EQ(c.branches.size(), 38u);
    EXPECT_EQ(c.generators.size(), 33u);
    EXPECT_EQ(c.generator_buses(), (std::vector<BusId>{1, 2, 7, 13, 14, 15, 16, 18, 21, 22, 23}));
    EXPECT_EQ(c.passive_buses().size(), 13u);
}

TEST(ParseCase, MinimalTwoBus) {
    const auto c = parse_case_json(two_bus_json());
    EXPECT_EQ(c.buses.size(), 2u);
    EXPECT_EQ(c.branches.size(), 1u);
    EXPECT_DOUBLE_EQ(c.buses[0].inertia_s, 8.0); // 2 H S / S_B
    EXPECT_DOUBLE_EQ(c.buses[1].damping_pu, 1.0);
    EXPECT_DOUBLE_EQ(c.buses[0].voltage_pu, 1.0);
}

TEST(ParseCase, DanglingBranchEndpointIsNamed) {
    auto j = two_bus_json();
    j["branches"].push_back({{"from", 1}, {"to", 99}, {"b_pu", 1.0}});
    const auto msg = error_of(j);
    EXPECT_NE(msg.find("dangling branch endpoint"), std::string::npos) << msg;
    EXPECT_NE(msg.find("99"), std::string::npos) << msg;
}

TEST(ParseCase, RejectsUnknownKeys) {
    auto j = two_bus_json();
    j["buses"][0]["colour"] = "red";
    EXPECT_NE(error_of(j).find("colour"), std::string::npos);
    auto k = two_bus_json();
    k["extra"] = 1;
    EXPECT_NE(error_of(k).find("extra"), std::string::npos);
}

TEST(ParseCase, RejectsStructuralProblems) {
    {
        auto j = two_bus_json();
        j["buses"].push_back({{"id", 3}, {"kind", "passive"}});
        EXPECT_NE(error_of(j).find("disconnected"), std::string::npos);
    }
    {
        auto j = two_bus_json();
        j["branches"].push_back({{"from", 2}, {"to", 2}, {"b_pu", 1.0}});
        EXPECT_NE(error_of(j).find("self-loop"), std::string::npos);
    }
    {
        auto j = two_bus_json();
        j["branches"].push_back({{"from", 2}, {"to", 1}, {"b_pu", 1.0}});
        EXPECT_NE(error_of(j).find("duplicate branch"), std::string::npos);
        j["branches"][1]["ckt"] = 2; // a second circuit is allowed
        EXPECT_EQ(error_of(j), "");
    }
    {
        auto j = two_bus_json();
        j["buses"][1]["kind"] = "passive";
        EXPECT_NE(error_of(j).find("passive bus"), std::string::npos);
    }
    {
        auto j = two_bus_json();
        j["branches"][0]["b_pu"] = -1.0;
        EXPECT_NE(error_of(j).find("b_pu"), std::string::npos);
    }
    {
        auto j = two_bus_json();
        j["generators"][0]["h_s"] = "four";
        EXPECT_NE(error_of(j), "");
    }
    {
        auto j = two_bus_json();
        j["vi_candidates"] = {{{"bus", 1}, {"m_min_s", 1.0}, {"m_max_s", 0.5}, {"d_vi_pu", 0.0}}};
        EXPECT_NE(error_of(j).find("m_min_s"), std::string::npos);
    }
}

TEST(ParseCase, MissingFileIsInputError) {
    EXPECT_THROW(parse_case("/nonexistent/case.json"), InputError);
}

// ---------------------------------------------------------- laplacian

TEST(BuildLaplacian, TriangleIsDegreeMinusAdjacency) {
    GridCase c;
    for (int i = 1; i <= 3; ++i) c.buses.push_back({i, BusKind::Generator});
    c.branches = {{1, 2, 1.0}, {2, 3, 1.0}, {1, 3, 1.0}};
    for (int i = 1; i <= 3; ++i) c.generators.push_back({i, 1.0, 100.0, 1.0});
    validate_case(c);
    const auto lap = build_laplacian(c);
    Eigen::Matrix3d expect;
    expect << 2, -1, -1, -1, 2, -1, -1, -1, 2;
    EXPECT_EQ(lap.matrix, Eigen::MatrixXd(expect));
}

TEST(BuildLaplacian, SingleEdge) {
    const auto lap = build_laplacian(parse_case_json(two_bus_json()));
    Eigen::Matrix2d expect;
    expect << 0.5, -0.5, -0.5, 0.5;
    EXPECT_EQ(lap.matrix, Eigen::MatrixXd(expect));
}

TEST(BuildLaplacian, VoltageWeightsAndParallelCircuits) {
    auto j = two_bus_json();
    j["buses"][0]["v_pu"] = 1.1;
    j["buses"][1]["v_pu"] = 0.9;
    j["branches"].push_back({{"from", 1}, {"to", 2}, {"b_pu", 0.25}, {"ckt", 2}});
    const auto lap = build_laplacian(parse_case_json(j));
    EXPECT_NEAR(lap.matrix(0, 1), -(0.5 + 0.25) * 1.1 * 0.9, 1e-15);
}

TEST(BuildLaplacian, Rts24RowSumsAndSymmetry) {
    const auto lap = build_laplacian(testing_support::rts24());
    ASSERT_EQ(lap.matrix.rows(), 24);
    for (Eigen::Index i = 0; i < 24; ++i) {
        long double s = 0.0L; // summation oracle
        for (Eigen::Index k = 0; k < 24; ++k) s += lap.matrix(i, k);
        EXPECT_LE(std::abs(static_cast<double>(s)), 1e-12) << "row " << i;
    }
    EXPECT_TRUE(lap.matrix == lap.matrix.transpose());
}

TEST(BuildLaplacianProperty, RandomCasesSatisfyLaplacianInvariants) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 20);
        const auto c = testing_support::random_case(rng, n, static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1)));
        const auto lap = build_laplacian(c);
        EXPECT_LE((lap.matrix * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_TRUE(lap.matrix == lap.matrix.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap.matrix);
        const double top = es.eigenvalues()(n - 1);
        EXPECT_LE(std::abs(es.eigenvalues()(0)), 1e-9 * top);
        EXPECT_GT(es.eigenvalues()(1), 1e-9 * top) << "zero eigenvalue must be simple";
    }
}

// ------------------------------------------------------------ inertia

TEST(SystemInertia, SingleGenerator) {
    GridCase c;
    c.base_mva = 100.0;
    c.buses = {{1, BusKind::Generator}};
    c.generators = {{1, 4.0, 100.0, 0.0}};
    const auto s = system_inertia(c);
    EXPECT_DOUBLE_EQ(s.stored_energy_mws, 400.0);
    EXPECT_DOUBLE_EQ(s.inertia_constant_s, 4.0);
}

TEST(SystemInertia, SymmetricAverage) {
    GridCase c;
    c.base_mva = 200.0;
    c.generators = {{1, 2.0, 100.0, 0.0}, {2, 6.0, 100.0, 0.0}};
    EXPECT_DOUBLE_EQ(system_inertia(c).inertia_constant_s, 4.0);
}

TEST(SystemInertia, Rts24MatchesHandSumOfCaseFile) {
    std::ifstream in(testing_support::data_path("rts24.json"));
    const auto j = nlohmann::json::parse(in);
    double e = 0.0;
    for (const auto& g : j["generators"]) e += g["h_s"].get<double>() * g["s_mva"].get<double>();
    const auto s = system_inertia(testing_support::rts24());
    EXPECT_NEAR(s.stored_energy_mws, e, 1e-9 * e);
    EXPECT_NEAR(s.inertia_constant_s, e / j["system"]["base_mva"].get<double>(), 1e-12);
}

TEST(SystemInertia, PermutationInvariant) {
    auto c = testing_support::rts24();
    const double e0 = system_inertia(c).stored_energy_mws;
    std::mt19937_64 rng(3);
    std::shuffle(c.generators.begin(), c.generators.end(), rng);
    EXPECT_NEAR(system_inertia(c).stored_energy_mws, e0, 1e-12 * e0);
    GridCase empty;
    EXPECT_THROW(system_inertia(empty), InputError);
}

TEST(AggregateRocof, DirectSubstitution) {
    GridCase c;
    c.base_mva = 100.0;
    c.nominal_hz = 60.0;
    c.generators = {{1, 4.0, 100.0, 0.0}};
    EXPECT_DOUBLE_EQ(aggregate_rocof(c, 0.0), 0.0);
    EXPECT_NEAR(aggregate_rocof(c, 6.0), -0.45, 1e-15);
    // Homogeneous of degree 1 in the power step and -1 in inertia.
    EXPECT_NEAR(aggregate_rocof(c, 12.0), 2.0 * aggregate_rocof(c, 6.0), 1e-15);
    c.generators[0].inertia_s = 8.0;
    EXPECT_NEAR(aggregate_rocof(c, 6.0), -0.225, 1e-15);
    c.generators[0].inertia_s = 0.0;
    EXPECT_THROW(aggregate_rocof(c, 6.0), InputError);
}

// ------------------------------------------------------ kron reduction

TEST(KronReduce, SeriesPathCombination) {
    const auto lap = testing_support::laplacian_from_edges(3, {{1, 2, 1.0}, {2, 3, 1.0}});
    const auto net = kron_reduce(lap, {2});
    ASSERT_EQ(net.size(), 2);
    EXPECT_EQ(net.bus_ids, (std::vector<BusId>{1, 3}));
    EXPECT_NEAR(-net.laplacian(0, 1), 0.5, 1e-15);
    EXPECT_NEAR(net.laplacian(0, 0), 0.5, 1e-15);
}

TEST(KronReduce, EmptyEliminationIsIdentity) {
    std::mt19937_64 rng(5);
    const auto lap = testing_support::laplacian_from_edges(6, testing_support::random_connected_edges(rng, 6, 4));
    const auto net = kron_reduce(lap, {});
    EXPECT_EQ(net.laplacian, lap.matrix);
    EXPECT_TRUE(net.eliminated_ids.empty());
}

TEST(KronReduce, StarMatchesSymbolicSchurComplement) {
    // Center bus 4 passive; leaves 1..3 with unit susceptance. The Schur
    // complement I - (1/3) 1 1^T gives pairwise effective susceptance 1/3.
    const auto lap = testing_support::laplacian_from_edges(4, {{1, 4, 1.0}, {2, 4, 1.0}, {3, 4, 1.0}});
    const auto net = kron_reduce(lap, {4});
    const Eigen::MatrixXd expect =
        Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
    EXPECT_LE((net.laplacian - expect).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(net.laplacian(0, 1), -1.0 / 3.0, 1e-15);
}

TEST(KronReduce, PassiveIslandIsReportedWithItsBuses) {
    // Buses 3-4 form an island with no path to the retained buses.
    const auto lap = testing_support::laplacian_from_edges(4, {{1, 2, 1.0}, {3, 4, 1.0}});
    try {
        kron_reduce(lap, {3, 4});
        FAIL() << "expected an error";
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find('3'), std::string::npos) << msg;
        EXPECT_NE(msg.find('4'), std::string::npos) << msg;
    }
}

TEST(KronReduce, DistributionFactorsConservePower) {
    const auto net = testing_support::reduce(testing_support::rts24());
    ASSERT_EQ(net.distribution.cols(), 13);
    for (Eigen::Index k = 0; k < net.distribution.cols(); ++k) {
        EXPECT_NEAR(net.distribution.col(k).sum(), 1.0, 1e-12);
        EXPECT_GE(net.distribution.col(k).minCoeff(), -1e-14);
    }
    const Eigen::VectorXd p = reduce_injection(net, 3, -0.1);
    EXPECT_NEAR(p.sum(), -0.1, 1e-14);
    EXPECT_EQ(reduce_injection(net, 7, 0.2)(net.index_of(7)), 0.2);
    EXPECT_THROW(reduce_injection(net, 99, 0.1), InputError);
}

TEST(KronReduceProperty, DcSolutionsAgreeWithFullNetwork) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 13);
        const int passive = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 2));
        const auto c = testing_support::random_case(rng, n, passive);
        const auto lap = build_laplacian(c);
        const auto net = kron_reduce(c, lap);
        const auto g = net.size();
        Eigen::VectorXd pg(g);
        for (Eigen::Index i = 0; i < g; ++i) pg(i) = testing_support::uniform(rng, -1.0, 1.0);
        pg.array() -= pg.mean();
        // Ground the last retained bus in both networks.
        const Eigen::Index ref_full = lap.index.at(net.bus_ids.back());
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != ref_full) keep.push_back(i);
        Eigen::VectorXd p_full = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < g; ++i) p_full(lap.index.at(net.bus_ids[i])) = pg(i);
        Eigen::VectorXd th_full = Eigen::VectorXd::Zero(n);
        const Eigen::MatrixXd lf = lap.matrix(keep, keep);
        const Eigen::VectorXd pf = p_full(keep);
        const Eigen::VectorXd sol_full = lf.fullPivLu().solve(pf);
        th_full(keep) = sol_full;
        Eigen::VectorXd th_red = Eigen::VectorXd::Zero(g);
        th_red.head(g - 1) = net.laplacian.topLeftCorner(g - 1, g - 1).fullPivLu().solve(pg.head(g - 1));
        double err = 0.0;
        for (Eigen::Index i = 0; i < g; ++i)
            err = std::max(err, std::abs(th_full(lap.index.at(net.bus_ids[i])) - th_red(i)));
        EXPECT_LE(err, 1e-9 * std::max(1.0, th_red.cwiseAbs().maxCoeff())) << "trial " << trial;
    }
}

TEST(KronReduceProperty, SequentialEliminationMatchesBlock) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 10);
        const auto lap = testing_support::laplacian_from_edges(n, testing_support::random_connected_edges(rng, n, n));
        std::vector<BusId> drop;
        for (int b = 1; b <= n; ++b)
            if (b > 2 && rng() % 2 == 0) drop.push_back(b);
        const auto block = kron_reduce(lap, drop);

        // One bus at a time with the scalar Schur complement.
        Eigen::MatrixXd l = lap.matrix;
        std::vector<BusId> ids = lap.bus_ids;
        for (BusId b : drop) {
            const auto k = std::find(ids.begin(), ids.end(), b) - ids.begin();
            const Eigen::VectorXd col = l.col(k);
            Eigen::MatrixXd next = l - col * col.transpose() / l(k, k);
            std::vector<Eigen::Index> keep;
            for (Eigen::Index i = 0; i < l.rows(); ++i)
                if (i != k) keep.push_back(i);
            l = next(keep, keep);
            ids.erase(ids.begin() + k);
        }
        EXPECT_EQ(ids, block.bus_ids);
        EXPECT_LE((l - block.laplacian).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(ReducedNetworkInvariant, SpectrumAndEigenvectors) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto c = testing_support::random_case(rng, 12, 4);
        const auto net = testing_support::reduce(c);
        const auto n = net.size();
        const double top = net.eigenvalues(n - 1);
        EXPECT_LE(std::abs(net.eigenvalues(0)), 1e-9 * top);
        const Eigen::MatrixXd gram = net.eigenvectors.transpose() * net.eigenvectors;
        EXPECT_LE((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
        const Eigen::VectorXd u1 = net.eigenvectors.col(0);
        EXPECT_LE(u1.maxCoeff() - u1.minCoeff(), 1e-10);
        EXPECT_LE((net.laplacian - net.laplacian.transpose()).cwiseAbs().maxCoeff(), 1e-12 * top);
        EXPECT_LE((net.laplacian * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-10 * top);
    }
}

// ------------------------------------------------------------ fiedler

TEST(Fiedler, TwoBusClosedForm) {
    const auto net = testing_support::network_from_edges(2, {{1, 2, 0.5}});
    const auto f = fiedler(net);
    EXPECT_NEAR(f.eigenvalue, 1.0, 1e-14);
    EXPECT_NEAR(f.components(0), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(f.components(1), -1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_FALSE(f.degenerate);
}

TEST(Fiedler, ThreePathAgainstDenseEigensolver) {
    const auto net = testing_support::network_from_edges(3, {{1, 2, 1.0}, {2, 3, 1.0}});
    const auto f = fiedler(net);
    // Oracle: general (non-symmetric) eigensolver on the same matrix.
    Eigen::EigenSolver<Eigen::MatrixXd> es(net.laplacian);
    std::vector<std::pair<double, Eigen::Index>> ev;
    for (Eigen::Index i = 0; i < 3; ++i) ev.emplace_back(es.eigenvalues()(i).real(), i);
    std::sort(ev.begin(), ev.end());
    Eigen::VectorXd u = es.eigenvectors().col(ev[1].second).real().normalized();
    if (u(0) < 0.0) u = -u;
    EXPECT_NEAR(f.eigenvalue, ev[1].first, 1e-12);
    EXPECT_LE((f.components - u).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(f.eigenvalue, 1.0, 1e-12);
    EXPECT_NEAR(f.components(0), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(f.components(1), 0.0, 1e-12);
}

TEST(Fiedler, Rts24Ranking) {
    const auto net = testing_support::reduce(testing_support::rts24());
    const auto f = fiedler(net);
    Eigen::Index top = 0;
    f.weights.maxCoeff(&top);
    EXPECT_EQ(net.bus_ids[top], 7);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(net.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return f.weights(a) < f.weights(b); });
    EXPECT_EQ(net.bus_ids[order[0]], 13);
    EXPECT_EQ(net.bus_ids[order[1]], 23);
}

TEST(FiedlerInvariant, EigenpairResidualAndNormalization) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = testing_support::reduce(testing_support::random_case(rng, 15, 5));
        const auto f = fiedler(net);
        const double top = net.eigenvalues(net.size() - 1);
        EXPECT_GT(f.eigenvalue, 0.0);
        EXPECT_LE(std::abs(f.components.sum()), 1e-10);
        EXPECT_NEAR(f.components.norm(), 1.0, 1e-12);
        EXPECT_LE((net.laplacian * f.components - f.eigenvalue * f.components).norm(), 1e-9 * top);
        // First non-negligible component is positive.
        for (Eigen::Index i = 0; i < f.components.size(); ++i)
            if (std::abs(f.components(i)) > 1e-9) {
                EXPECT_GT(f.components(i), 0.0);
                break;
            }
    }
}

TEST(Fiedler, DegenerateSpectrumWarns) {
    // 4-cycle: eigenvalues 0, 2, 2, 4.
    const auto net = testing_support::network_from_edges(4, {{1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {4, 1, 1.0}});
    const auto f = fiedler(net);
    EXPECT_TRUE(f.degenerate);
    EXPECT_FALSE(f.warning.empty());
    EXPECT_NEAR(f.eigenvalue, 2.0, 1e-12);
}

// ------------------------------------------------------- modal formula

TEST(ModalFormula, ZeroAtTimeZero) {
    const auto net = testing_support::reduce(testing_support::rts24());
    const auto d = modal_frequency_deviation(net, 1.0, 0.5, 7, -0.04, 0.0);
    EXPECT_EQ(d.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ModalFormula, SingleBusScalarStepResponse) {
    gridvi::Laplacian lap;
    lap.matrix = Eigen::MatrixXd::Zero(1, 1);
    lap.bus_ids = {1};
    lap.index[1] = 0;
    const auto net = kron_reduce(lap, {});
    const double m = 4.0, gamma = 0.25, dp = -0.03;
    for (double t : {0.1, 1.0, 5.0, 30.0}) {
        const double expect = dp * (1.0 - std::exp(-gamma * t)) / (m * gamma);
        EXPECT_NEAR(modal_frequency_deviation(net, m, gamma, 1, dp, t)(0), expect, 1e-15) << t;
    }
}

TEST(ModalFormula, ZeroModeIsPositionIndependent) {
    // Non-zero modes sum to zero across buses, so the bus sum only sees alpha = 1.
    const auto net = testing_support::reduce(testing_support::rts24());
    const double m = 0.5, gamma = 2.0, dp = -0.04;
    for (BusId b : {1, 7, 23})
        for (double t : {0.3, 2.0, 8.0}) {
            const auto d = modal_frequency_deviation(net, m, gamma, b, dp, t);
            const double expect = dp * (1.0 - std::exp(-gamma * t)) / (m * gamma);
            EXPECT_NEAR(d.sum(), expect, 1e-12);
        }
}

TEST(ModalFormula, OverdampedModesUseContinuation) {
    const auto net = testing_support::network_from_edges(2, {{1, 2, 0.5}});
    // lambda_2/m = 1 and gamma^2/4 = 4: overdamped; compare with the closed
    // form of the difference mode (two real poles).
    const double m = 1.0, gamma = 4.0, dp = 1.0, t = 0.7;
    const auto d = modal_frequency_deviation(net, m, gamma, 1, dp, t);
    const double k = std::sqrt(gamma * gamma / 4.0 - 1.0);
    const double diff_mode = std::exp(-gamma * t / 2.0) * std::sinh(k * t) / k; // u_21 u_2b = 1/2
    const double common = (1.0 - std::exp(-gamma * t)) / gamma;
    EXPECT_NEAR(d(0), dp / m * (0.5 * common + 0.5 * diff_mode), 1e-14);
    EXPECT_NEAR(d(1), dp / m * (0.5 * common - 0.5 * diff_mode), 1e-14);
    EXPECT_THROW(modal_frequency_deviation(net, 0.0, 1.0, 1, 1.0, 1.0), InputError);
    EXPECT_THROW(modal_frequency_deviation(net, 1.0, -1.0, 1, 1.0, 1.0), InputError);
}

TEST(ModeRateRange, SingleModeAndOverdampedReport) {
    const auto net = testing_support::network_from_edges(2, {{1, 2, 0.5}});
    const auto r = mode_rate_range(net, 1.0, 0.0);
    ASSERT_TRUE(r.interval.has_value());
    EXPECT_NEAR(r.interval->first, 1.0, 1e-14);
    EXPECT_NEAR(r.interval->second, 1.0, 1e-14);
    const auto over = mode_rate_range(net, 1.0, 3.0);
    EXPECT_FALSE(over.interval.has_value());
    EXPECT_EQ(over.overdamped_modes, (std::vector<Eigen::Index>{2}));
}

TEST(ModeRateRange, Rts24IntervalIsOrdered) {
    const auto net = testing_support::reduce(testing_support::rts24());
    const auto r = mode_rate_range(net, 0.01, 0.5);
    ASSERT_TRUE(r.interval.has_value());
    EXPECT_NEAR(r.interval->first, std::sqrt(net.eigenvalues(1) / 0.01 - 0.0625), 1e-12);
    EXPECT_NEAR(r.interval->second, std::sqrt(net.eigenvalues(10) / 0.01 - 0.0625), 1e-12);
}
