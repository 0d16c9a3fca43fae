#include "doctest.h"

#include "vrpsd/oracle.hpp"
#include "vrpsd/separation.hpp"

#include <random>

using namespace vrpsd;

namespace {

Instance make_instance(int n, int k, long cap, std::vector<std::vector<long>> demands,
                       std::vector<Rational> probs = {}) {
    Instance inst;
    inst.n = n;
    inst.capacity = Rational(cap);
    inst.fleet = k;
    inst.cost.assign(n + 1, std::vector<Rational>(n + 1, Rational(0)));
    for (int u = 0; u <= n; ++u) {
        for (int v = 0; v <= n; ++v) {
            if (u != v) inst.cost[u][v] = Rational(1 + (u + v) % 4);
        }
    }
    inst.scenarios.count = static_cast<int>(demands.size());
    for (const auto& row : demands) {
        std::vector<Rational> r;
        for (long d : row) r.push_back(Rational(d));
        inst.scenarios.demands.push_back(std::move(r));
    }
    if (probs.empty()) {
        inst.scenarios.probs.assign(inst.scenarios.count,
                                    Rational(1) / inst.scenarios.count);
    } else {
        inst.scenarios.probs = std::move(probs);
    }
    inst.finalize();
    return inst;
}

std::vector<Rational> zero_theta(int n) { return std::vector<Rational>(n, Rational(0)); }

}  // namespace

TEST_CASE("block-cut forest of an integer route is a path") {
    Instance inst = make_instance(3, 1, 100, {{1, 1, 1}});
    RoutingPlan plan;
    plan.routes = {{1, 2, 3}};
    EdgeVector x = edges_from_plan(plan, inst.n);
    BlockCutForest forest = build_block_cut_forest(x, inst);
    REQUIRE(forest.trees.size() == 1);
    const BlockCutTree& tree = forest.trees[0];
    CHECK(tree.depot_flow == 2);
    CHECK(tree.is_path());
    CHECK(tree.customers() == std::vector<int>{1, 2, 3});
    // Alternating blocks and cut vertices: 2 dummy blocks + 2 edge blocks +
    // 3 cut vertices.
    int blocks = 0, cuts = 0;
    for (const auto& node : tree.nodes) (node.is_block ? blocks : cuts)++;
    CHECK(cuts == 3);
    CHECK(blocks == 4);
}

TEST_CASE("isolated customer yields a singleton tree") {
    Instance inst = make_instance(3, 2, 100, {{1, 1, 1}});
    RoutingPlan plan;
    plan.routes = {{1, 2}, {3}};
    EdgeVector x = edges_from_plan(plan, inst.n);
    BlockCutForest forest = build_block_cut_forest(x, inst);
    REQUIRE(forest.trees.size() == 2);
    bool found_single = false;
    for (const BlockCutTree& tree : forest.trees) {
        if (tree.customers() == std::vector<int>{3}) {
            found_single = true;
            CHECK(tree.nodes.size() == 1);
            CHECK(tree.nodes[0].is_block);
            CHECK(tree.depot_flow == 2);
        }
    }
    CHECK(found_single);
}

TEST_CASE("partial routes from integer points mirror the routes") {
    Instance inst = make_instance(3, 1, 100, {{1, 1, 1}});
    RoutingPlan plan;
    plan.routes = {{1, 2, 3}};
    EdgeVector x = edges_from_plan(plan, inst.n);
    auto hs = get_partial_routes(x, zero_theta(3), inst);
    REQUIRE(hs.size() == 1);
    CHECK(hs[0].sets == std::vector<std::vector<int>>{{1}, {2}, {3}});
}

TEST_CASE("fractional diamond component") {
    // Cut vertices 1 and 6 around a fully fractional K4 on {2,3,4,5}:
    // x_{0,1} = x_{0,6} = 1, all K4 edges 1/2, spokes 1-2, 1-3, 4-6, 5-6 at 1/2.
    const int n = 6;
    Instance inst = make_instance(n, 1, 100, {{1, 1, 1, 1, 1, 1}});
    EdgeVector x(num_edges(n), Rational(0));
    Rational half(1, 2);
    x[edge_index(0, 1, n)] = 1;
    x[edge_index(0, 6, n)] = 1;
    for (int u : {2, 3, 4, 5}) {
        for (int v : {2, 3, 4, 5}) {
            if (u < v) x[edge_index(u, v, n)] = half;
        }
    }
    x[edge_index(1, 2, n)] = half;
    x[edge_index(1, 3, n)] = half;
    x[edge_index(4, 6, n)] = half;
    x[edge_index(5, 6, n)] = half;

    BlockCutForest forest = build_block_cut_forest(x, inst);
    REQUIRE(forest.trees.size() == 1);
    CHECK(forest.trees[0].depot_flow == 2);
    CHECK(forest.trees[0].is_path());

    auto hs = get_partial_routes(x, zero_theta(n), inst);
    REQUIRE(hs.size() == 1);
    CHECK(hs[0].sets == std::vector<std::vector<int>>{{1}, {2, 3, 4, 5}, {6}});
}

TEST_CASE("depot-flow-two trees stay paths across random fractional points") {
    std::mt19937_64 rng(79);
    long before = separation_counters().flow2_trees.load();
    for (int trial = 0; trial < 300; ++trial) {
        int n = 4 + static_cast<int>(rng() % 3);
        int k = 1 + static_cast<int>(rng() % 2);
        Instance inst = make_instance(n, k, 1000,
                                      {std::vector<long>(n, 1), std::vector<long>(n, 2)});
        std::vector<EdgeVector> pts;
        oracle::enumerate_plans(inst, [&](const RoutingPlan& plan) {
            if (rng() % 2) pts.push_back(edges_from_plan(plan, inst.n));
            return pts.size() < 3;
        });
        if (pts.empty()) continue;
        EdgeVector x(num_edges(n), Rational(0));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t e = 0; e < x.size(); ++e) {
                x[e] += pts[i][e] / static_cast<int>(pts.size());
            }
        }
        CHECK_NOTHROW(build_block_cut_forest(x, inst));
    }
    CHECK(separation_counters().flow2_trees.load() > before);
}

TEST_CASE("rci separation at integer points") {
    Instance inst = make_instance(4, 2, 10, {{6, 6, 3, 3}});
    SUBCASE("overloaded route is returned") {
        RoutingPlan plan;
        plan.routes = {{1, 2}, {3, 4}};  // 12 > 10 on the first route
        auto sets = separate_rci(edges_from_plan(plan, inst.n), inst, true);
        REQUIRE(sets.size() == 1);
        CHECK(sets[0] == std::vector<int>{1, 2});
    }
    SUBCASE("feasible point returns nothing") {
        RoutingPlan plan;
        plan.routes = {{1, 3}, {2, 4}};
        CHECK(separate_rci(edges_from_plan(plan, inst.n), inst, true).empty());
    }
    SUBCASE("subtours are caught") {
        Instance inst5 = make_instance(5, 2, 100, {{1, 1, 1, 1, 1}});
        EdgeVector y(num_edges(5), Rational(0));
        y[edge_index(0, 1, 5)] = 2;
        y[edge_index(0, 2, 5)] = 2;
        y[edge_index(3, 4, 5)] = 1;
        y[edge_index(4, 5, 5)] = 1;
        y[edge_index(3, 5, 5)] = 1;
        auto sets = separate_rci(y, inst5, true);
        REQUIRE(sets.size() == 1);
        CHECK(sets[0] == std::vector<int>{3, 4, 5});
    }
}

TEST_CASE("fractional rci heuristic finds a violated component") {
    // Component {1,2,3} with mean demand 25 against C = 10 and a path worth
    // x(S) = 2 = |S| - 1 > |S| - 3.
    Instance inst = make_instance(4, 3, 10, {{8, 9, 8, 2}});
    EdgeVector x(num_edges(4), Rational(0));
    x[edge_index(0, 1, 4)] = 1;
    x[edge_index(1, 2, 4)] = 1;
    x[edge_index(2, 3, 4)] = 1;
    x[edge_index(0, 3, 4)] = 1;
    x[edge_index(0, 4, 4)] = 2;
    auto sets = separate_rci(x, inst, false);
    bool found = false;
    for (const auto& s : sets) {
        if (s == std::vector<int>{1, 2, 3}) found = true;
    }
    CHECK(found);
}

TEST_CASE("separate_vrpsd returns nothing for satisfied points") {
    Instance inst = make_instance(3, 1, 100, {{1, 1, 1}});
    RoutingPlan plan;
    plan.routes = {{1, 2, 3}};
    EdgeVector x = edges_from_plan(plan, inst.n);
    SeparationConfig cfg;
    cfg.mode = Disaggregation::D2;
    cfg.use_set_cuts = true;
    // Zero recourse everywhere: theta = 0 is already feasible.
    auto res = separate_vrpsd(x, zero_theta(3), cfg, inst);
    CHECK(res.rci_sets.empty());
    CHECK(res.cuts.empty());
}

TEST_CASE("zero theta at an integer point yields a full-strength cut") {
    // H corresponding to a route makes the partial-route bound collapse to
    // the exact route recourse, so the emitted cut carries bound Q(R).
    Instance inst = make_instance(4, 2, 10, {{6, 6, 2, 2}, {2, 2, 2, 2}});
    RoutingPlan plan;
    plan.routes = {{1, 2}, {3, 4}};
    REQUIRE(plan_is_feasible(plan, inst));
    Rational q = q_classical(inst, {1, 2}).value;
    REQUIRE(q > 0);
    EdgeVector x = edges_from_plan(plan, inst.n);
    SeparationConfig cfg;
    cfg.mode = Disaggregation::D2;
    auto res = separate_vrpsd(x, zero_theta(inst.n), cfg, inst);
    CHECK(res.rci_sets.empty());
    bool strong = false;
    for (const ILSCut& cut : res.cuts) {
        if (cut.bound >= q) strong = true;
    }
    CHECK(strong);
}

TEST_CASE("every returned cut is violated at the query point and valid on F") {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 4 + static_cast<int>(rng() % 3);  // enumeration up to n = 6
        int k = 1 + static_cast<int>(rng() % 2);
        std::vector<std::vector<long>> demands(2, std::vector<long>(n));
        for (auto& row : demands) {
            for (long& d : row) d = 1 + static_cast<long>(rng() % 9);
        }
        Instance inst = make_instance(n, k, 9, demands);

        for (auto mode : {Disaggregation::D1, Disaggregation::D2}) {
            SeparationConfig cfg;
            cfg.mode = mode;
            cfg.use_set_cuts = mode == Disaggregation::D2;

            // Query point: a feasible integer plan with deliberately short theta.
            std::vector<EdgeVector> points;
            oracle::enumerate_plans(inst, [&](const RoutingPlan& plan) {
                points.push_back(edges_from_plan(plan, inst.n));
                return points.size() < 3;
            });
            if (points.empty()) continue;
            const EdgeVector& x = points[rng() % points.size()];
            std::vector<Rational> theta(inst.n, Rational(0));

            SeparationResult res = separate_vrpsd(x, theta, cfg, inst);
            for (const ILSCut& cut : res.cuts) {
                // Violated at the query point.
                Rational lhs = 0;
                for (int v : cut.theta_support) lhs += theta[v - 1];
                CHECK(lhs < cut.bound * cut.activation.eval(x));
                // Valid at every feasible integer point with its exact
                // mode-consistent recourse vector.
                oracle::enumerate_plans(inst, [&](const RoutingPlan& plan) {
                    EdgeVector xf = edges_from_plan(plan, inst.n);
                    std::vector<Rational> exact(inst.n, Rational(0));
                    for (const Route& r : plan.routes) {
                        for (const auto& [v, val] : disaggregate(inst, r, mode)) {
                            exact[v - 1] += val;
                        }
                    }
                    Rational lhs_f = 0;
                    for (int v : cut.theta_support) lhs_f += exact[v - 1];
                    CHECK(lhs_f >= cut.bound * cut.activation.eval(xf));
                    return true;
                });
            }
        }
    }
}

TEST_CASE("verify_incumbent") {
    Instance inst = make_instance(2, 1, 10, {{6, 6}});
    RoutingPlan plan;
    plan.routes = {{1, 2}};
    EdgeVector x = edges_from_plan(plan, inst.n);
    Rational q = q_classical(inst, {1, 2}).value;
    REQUIRE(q > 0);
    SeparationConfig cfg;
    cfg.mode = Disaggregation::D2;

    SUBCASE("exact disaggregation is accepted") {
        std::vector<Rational> theta(inst.n, Rational(0));
        for (const auto& [v, val] : disaggregate(inst, {1, 2}, Disaggregation::D2)) {
            theta[v - 1] = val;
        }
        CHECK(verify_incumbent(x, theta, cfg, inst).accepted);
    }
    SUBCASE("zero theta earns one cut per positive-recourse route") {
        auto check = verify_incumbent(x, zero_theta(inst.n), cfg, inst);
        CHECK_FALSE(check.accepted);
        REQUIRE(check.cuts.size() == 1);
        CHECK(check.cuts[0].bound == q);
        CHECK(check.cuts[0].tag == CutTag::RouteCut);
        CHECK(check.cuts[0].theta_support == std::vector<int>{1, 2});
    }
    SUBCASE("D1 support is the smallest index") {
        SeparationConfig d1;
        d1.mode = Disaggregation::D1;
        auto check = verify_incumbent(x, zero_theta(inst.n), d1, inst);
        REQUIRE(check.cuts.size() == 1);
        CHECK(check.cuts[0].theta_support == std::vector<int>{1});
    }
    SUBCASE("repeated application terminates in acceptance") {
        // Mimic the cut loop: theta rises to the implied bound each round.
        std::vector<Rational> theta = zero_theta(inst.n);
        for (int round = 0; round < 10; ++round) {
            auto check = verify_incumbent(x, theta, cfg, inst);
            if (check.accepted) break;
            for (const ILSCut& cut : check.cuts) {
                // Lift the first supported component.
                theta[cut.theta_support.front() - 1] = cut.bound;
            }
        }
        CHECK(verify_incumbent(x, theta, cfg, inst).accepted);
    }
}

TEST_CASE("d1 cut pointwise dominates the d2 form at equal bounds") {
    // theta_v >= L*W implies theta(V_+(H)) >= L*W for nonnegative theta.
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 4;
        std::vector<Rational> theta(n);
        for (auto& t : theta) t = Rational(static_cast<long long>(rng() % 8), 2);
        Rational rhs(static_cast<long long>(rng() % 10), 3);
        std::vector<int> support = {1, 2, 3};
        int v = support.front();
        bool d1_ok = theta[v - 1] >= rhs;
        Rational sum = 0;
        for (int u : support) sum += theta[u - 1];
        bool d2_ok = sum >= rhs;
        if (d1_ok) CHECK(d2_ok);
    }
}
