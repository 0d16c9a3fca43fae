#include "doctest.h"

#include "vrpsd/oracle.hpp"

#include <functional>
#include <random>

using namespace vrpsd;

namespace {

Instance unit_instance(int n, int k) {
    Instance inst;
    inst.n = n;
    inst.capacity = Rational(1000);
    inst.fleet = k;
    inst.cost.assign(n + 1, std::vector<Rational>(n + 1, Rational(0)));
    for (int u = 0; u <= n; ++u) {
        for (int v = 0; v <= n; ++v) {
            if (u != v) inst.cost[u][v] = Rational((u + 1) * (v + 1));
        }
    }
    inst.scenarios.count = 1;
    inst.scenarios.demands = {std::vector<Rational>(n, Rational(1))};
    inst.scenarios.probs = {Rational(1)};
    inst.finalize();
    return inst;
}

// Independent count of plans: pick the block of the smallest remaining
// customer, times the distinct orders of each block.
long independent_plan_count(int n, int k) {
    if (k > n || k < 1) return 0;
    auto orders = [](int s) {
        long f = 1;
        for (int i = 2; i <= s; ++i) f *= i;
        return s >= 2 ? f / 2 : 1;
    };
    // choose(n-1, s-1) partitions via smallest-element recursion
    std::function<long(int, int)> rec = [&](int rem, int blocks) -> long {
        if (blocks == 0) return rem == 0 ? 1 : 0;
        if (rem < blocks) return 0;
        long total = 0;
        // smallest remaining customer takes s-1 of the other rem-1 customers
        for (int s = 1; s <= rem - blocks + 1; ++s) {
            long choose = 1;
            for (int i = 0; i < s - 1; ++i) choose = choose * (rem - 1 - i) / (i + 1);
            total += choose * orders(s) * rec(rem - s, blocks - 1);
        }
        return total;
    };
    return rec(n, k);
}

}  // namespace

TEST_CASE("plan counts match the closed-form recursion") {
    CHECK(oracle::count_plans(unit_instance(3, 1)) == 3);   // 3!/2
    CHECK(oracle::count_plans(unit_instance(2, 2)) == 1);
    CHECK(oracle::count_plans(unit_instance(2, 3)) == 0);   // k > n
    for (int n = 1; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            CHECK(oracle::count_plans(unit_instance(n, k)) == independent_plan_count(n, k));
        }
    }
}

TEST_CASE("enumeration respects the capacity filter") {
    Instance inst = unit_instance(4, 2);
    inst.capacity = Rational(2);  // at most two unit customers per route
    inst.finalize();
    oracle::enumerate_plans(inst, [&](const RoutingPlan& plan) {
        for (const Route& r : plan.routes) CHECK(r.size() <= 2);
        return true;
    });
}

TEST_CASE("brute_force_fail hand checks") {
    CHECK(oracle::brute_force_fail(Rational(0), {}, Rational(10)) == 0);
    CHECK(oracle::brute_force_fail(Rational(10), {Rational(5)}, Rational(10)) == 1);
    CHECK(oracle::brute_force_fail(Rational(0), {Rational(25)}, Rational(10)) == 2);
    CHECK(oracle::brute_force_fail(Rational(7), {Rational(2), Rational(3)}, Rational(10)) == 1);
}

TEST_CASE("failure counts are ordering free") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Rational> demands;
        int len = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < len; ++i) {
            demands.push_back(Rational(static_cast<long long>(rng() % 13)));
        }
        Rational alpha(static_cast<long long>(rng() % 25));
        Rational cap(static_cast<long long>(5 + rng() % 10));
        CHECK_NOTHROW(oracle::brute_force_fail(alpha, demands, cap, true));
    }
}

TEST_CASE("zero-recourse optimum equals the deterministic optimum") {
    // Demands far below capacity: recourse vanishes, so the optimum is the
    // cheapest feasible plan by travel cost alone.
    Instance inst = unit_instance(3, 1);
    auto opt = oracle::brute_force_optimum(inst);
    REQUIRE(opt.feasible);
    // Hand enumeration: routes (1,2,3), (1,3,2), (2,1,3) with the cost matrix
    // c[u][v] = (u+1)(v+1).
    Rational best;
    bool first = true;
    for (const Route& r : {Route{1, 2, 3}, Route{1, 3, 2}, Route{2, 1, 3}}) {
        Rational c = inst.route_cost(r);
        if (first || c < best) best = c;
        first = false;
    }
    CHECK(opt.value == best);
}

TEST_CASE("single customer optimum") {
    Instance inst = unit_instance(1, 1);
    inst.capacity = Rational(10);
    inst.scenarios.demands = {{Rational(6)}};
    inst.finalize();
    auto opt = oracle::brute_force_optimum(inst);
    REQUIRE(opt.feasible);
    CHECK(opt.value == 2 * inst.cost[0][1]);  // demand fits, no recourse
    CHECK(opt.plan.routes == std::vector<Route>{{1}});
}

TEST_CASE("oracle recourse handles multi-trip demands") {
    // A raw 25-unit demand against capacity 10 pays two extra trips.
    Instance inst = unit_instance(2, 1);
    inst.capacity = Rational(10);
    inst.scenarios.count = 2;
    inst.scenarios.demands = {{Rational(25), Rational(1)}, {Rational(1), Rational(1)}};
    inst.scenarios.probs = {Rational(1, 2), Rational(1, 2)};
    inst.finalize();
    Rational q = oracle::route_recourse(inst, {1});
    CHECK(q == Rational(1, 2) * 2 * Rational(2) * inst.cost[0][1]);
}
