#pragma once

#include "vrpsd/instance.hpp"

#include <functional>

namespace vrpsd {
namespace oracle {

// Every partition of the customers into exactly `fleet` routes, routes
// canonicalized under reversal, filtered by expected load <= capacity.
// Returns false early if the callback returns false.
void enumerate_plans(const Instance& inst,
                     const std::function<bool(const RoutingPlan&)>& visit);

long count_plans(const Instance& inst);

// Direct evaluation of the per-scenario indicator sums; shares no code with
// the recourse module so the two can check each other.
Rational route_recourse(const Instance& inst, const Route& route);

struct Optimum {
    bool feasible = false;
    Rational value;  // includes objective_offset
    RoutingPlan plan;
};

Optimum brute_force_optimum(const Instance& inst);

// Left-hand side of the failure-counting identity: the double indicator sum
// over positions and trip counts. With all_orderings, asserts the value is
// the same under every permutation of the demands.
long brute_force_fail(const Rational& alpha, std::vector<Rational> demands,
                      const Rational& capacity, bool all_orderings = false);

}  // namespace oracle
}  // namespace vrpsd
