#include "vrpsd/oracle.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace vrpsd {
namespace oracle {

namespace {

constexpr int kMaxCustomers = 9;

// Failures observed along one directed traversal under one scenario, straight
// from the indicator sums (t ranges over trip counts).
Rational directed_recourse(const Instance& inst, const Route& seq) {
    Rational total = 0;
    for (int xi = 0; xi < inst.scenarios.count; ++xi) {
        Rational before = 0;
        Rational scenario_cost = 0;
        for (int v : seq) {
            Rational after = before + inst.demand(xi, v);
            long crossings = 0;
            for (BigInt t = 1;; ++t) {
                Rational tc = Rational(t) * inst.capacity;
                if (tc >= after) break;
                if (before <= tc) ++crossings;
            }
            if (crossings > 0) {
                scenario_cost += Rational(crossings) * 2 * inst.cost[0][v];
            }
            before = after;
        }
        total += inst.scenarios.probs[xi] * scenario_cost;
    }
    return total;
}

struct PlanEnumerator {
    const Instance& inst;
    const std::function<bool(const RoutingPlan&)>& visit;
    std::vector<std::vector<int>> blocks = {};
    std::vector<Rational> block_load = {};
    bool stopped = false;

    bool emit_orders(std::size_t block_idx, RoutingPlan& plan) {
        if (block_idx == blocks.size()) {
            return visit(plan);
        }
        std::vector<int> perm = blocks[block_idx];
        std::sort(perm.begin(), perm.end());
        do {
            if (perm.size() >= 2 && perm.front() > perm.back()) continue;  // reversal twin
            plan.routes.push_back(perm);
            bool keep_going = emit_orders(block_idx + 1, plan);
            plan.routes.pop_back();
            if (!keep_going) return false;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return true;
    }

    void assign(int customer) {
        if (stopped) return;
        if (customer > inst.n) {
            if (static_cast<int>(blocks.size()) != inst.fleet) return;
            RoutingPlan plan;
            if (!emit_orders(0, plan)) stopped = true;
            return;
        }
        int remaining = inst.n - customer + 1;  // unassigned customers, this one included
        if (static_cast<int>(blocks.size()) + remaining < inst.fleet) return;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            Rational load = block_load[b] + inst.expected_demand[customer];
            if (load > inst.capacity) continue;
            blocks[b].push_back(customer);
            std::swap(block_load[b], load);
            assign(customer + 1);
            std::swap(block_load[b], load);
            blocks[b].pop_back();
            if (stopped) return;
        }
        // Open a new block only if we can still reach exactly `fleet` blocks.
        if (static_cast<int>(blocks.size()) < inst.fleet &&
            inst.expected_demand[customer] <= inst.capacity) {
            blocks.push_back({customer});
            block_load.push_back(inst.expected_demand[customer]);
            assign(customer + 1);
            blocks.pop_back();
            block_load.pop_back();
        }
    }
};

}  // namespace

void enumerate_plans(const Instance& inst,
                     const std::function<bool(const RoutingPlan&)>& visit) {
    if (inst.n > kMaxCustomers) {
        throw std::invalid_argument("plan enumeration limited to n <= 9");
    }
    if (inst.fleet > inst.n) return;
    PlanEnumerator en{inst, visit};
    en.assign(1);
}

long count_plans(const Instance& inst) {
    long count = 0;
    enumerate_plans(inst, [&](const RoutingPlan&) {
        ++count;
        return true;
    });
    return count;
}

Rational route_recourse(const Instance& inst, const Route& route) {
    Rational fwd = directed_recourse(inst, route);
    Rational bwd = directed_recourse(inst, reversed(route));
    return std::min(fwd, bwd);
}

Optimum brute_force_optimum(const Instance& inst) {
    Optimum best;
    std::map<Route, Rational> recourse_cache;
    enumerate_plans(inst, [&](const RoutingPlan& plan) {
        Rational value = 0;
        for (const Route& r : plan.routes) {
            Route key = canonical_route(r);
            auto it = recourse_cache.find(key);
            if (it == recourse_cache.end()) {
                it = recourse_cache.emplace(key, route_recourse(inst, key)).first;
            }
            value += inst.route_cost(r) + it->second;
        }
        if (!best.feasible || value < best.value) {
            best.feasible = true;
            best.value = value;
            best.plan = plan;
        }
        return true;
    });
    if (best.feasible) best.value += inst.objective_offset;
    return best;
}

long brute_force_fail(const Rational& alpha, std::vector<Rational> demands,
                      const Rational& capacity, bool all_orderings) {
    if (demands.size() > 10) {
        throw std::invalid_argument("brute_force_fail limited to |S| <= 10");
    }
    auto evaluate = [&](const std::vector<Rational>& order) {
        long count = 0;
        Rational before = alpha;
        for (const Rational& d : order) {
            Rational after = before + d;
            for (BigInt t = 1;; ++t) {
                Rational tc = Rational(t) * capacity;
                if (tc >= after) break;
                if (before <= tc) ++count;
            }
            before = after;
        }
        return count;
    };
    long value = evaluate(demands);
    if (all_orderings) {
        std::sort(demands.begin(), demands.end());
        do {
            if (evaluate(demands) != value) {
                throw std::logic_error("failure count depends on the ordering");
            }
        } while (std::next_permutation(demands.begin(), demands.end()));
    }
    return value;
}

}  // namespace oracle
}  // namespace vrpsd
