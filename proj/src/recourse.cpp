#include "vrpsd/recourse.hpp"

#include <algorithm>
#include <stdexcept>

namespace vrpsd {

namespace {

// Number of trip counts t >= 1 with t*C < load.
BigInt trips_below(const Rational& load, const Rational& capacity) {
    BigInt c = rat_ceil(load / capacity) - 1;
    return c > 0 ? c : BigInt(0);
}

}  // namespace

long fail(const Instance& inst, const Rational& alpha, std::span<const int> customers, int xi) {
    Rational demand = inst.demand_sum(xi, customers);
    const Rational& cap = inst.capacity;
    if (alpha == 0) {
        return trips_below(demand, cap).convert_to<long>();
    }
    Rational r = alpha - Rational(rat_floor(alpha / cap)) * cap;
    BigInt count = rat_ceil((r + demand) / cap) - rat_ceil(r / cap);
    return count.convert_to<long>();
}

std::vector<long> failures_per_customer(const Instance& inst, const Route& directed, int xi) {
    std::vector<long> profile(directed.size(), 0);
    Rational before = 0;
    BigInt trips_before = 0;
    for (std::size_t j = 0; j < directed.size(); ++j) {
        Rational after = before + inst.demand(xi, directed[j]);
        BigInt trips_after = trips_below(after, inst.capacity);
        profile[j] = (trips_after - trips_before).convert_to<long>();
        before = after;
        trips_before = trips_after;
    }
    return profile;
}

Rational q_classical_directed(const Instance& inst, const Route& directed) {
    Rational total = 0;
    for (int xi = 0; xi < inst.scenarios.count; ++xi) {
        std::vector<long> profile = failures_per_customer(inst, directed, xi);
        Rational scenario_cost = 0;
        for (std::size_t j = 0; j < directed.size(); ++j) {
            if (profile[j] > 0) {
                scenario_cost += Rational(profile[j]) * 2 * inst.cost[0][directed[j]];
            }
        }
        total += inst.scenarios.probs[xi] * scenario_cost;
    }
    return total;
}

OrientedRecourse q_classical(const Instance& inst, const Route& route) {
    Rational fwd = q_classical_directed(inst, route);
    if (route.size() <= 1) return {fwd, route};
    Route rev = reversed(route);
    Rational bwd = q_classical_directed(inst, rev);
    if (fwd < bwd) return {fwd, route};
    if (bwd < fwd) return {bwd, rev};
    return route.front() <= route.back() ? OrientedRecourse{fwd, route}
                                         : OrientedRecourse{bwd, rev};
}

std::map<int, Rational> disaggregate(const Instance& inst, const Route& route,
                                     Disaggregation mode) {
    std::map<int, Rational> out;
    OrientedRecourse q = q_classical(inst, route);
    if (mode == Disaggregation::D1) {
        if (q.value > 0) {
            int v = *std::min_element(route.begin(), route.end());
            out[v] = q.value;
        }
        return out;
    }
    for (int xi = 0; xi < inst.scenarios.count; ++xi) {
        std::vector<long> profile = failures_per_customer(inst, q.orientation, xi);
        for (std::size_t j = 0; j < q.orientation.size(); ++j) {
            if (profile[j] > 0) {
                out[q.orientation[j]] += inst.scenarios.probs[xi] * Rational(profile[j]) * 2 *
                                         inst.cost[0][q.orientation[j]];
            }
        }
    }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

Rational lb_nu(const Instance& inst, const Rational& alpha, std::span<const int> customers,
               int nu, int xi) {
    if (nu < 1) throw std::invalid_argument("lb_nu needs a positive vehicle count");
    long failures = fail(inst, alpha, customers, xi);
    long take = failures - nu + 1;
    if (take <= 0) return Rational(0);
    std::vector<int> order(customers.begin(), customers.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (inst.cost[0][a] != inst.cost[0][b]) return inst.cost[0][a] < inst.cost[0][b];
        return a < b;
    });
    Rational total = 0;
    for (long j = 0; j < take && j < static_cast<long>(order.size()); ++j) {
        total += 2 * inst.cost[0][order[j]];
    }
    return total;
}

namespace {

Rational directed_partial_route_lb(const Instance& inst, const PartialRoute& h) {
    Rational total = 0;
    for (int xi = 0; xi < inst.scenarios.count; ++xi) {
        Rational alpha = 0;
        Rational scenario = 0;
        for (const auto& s : h.sets) {
            scenario += lb_nu(inst, alpha, s, 1, xi);
            alpha += inst.demand_sum(xi, s);
        }
        total += inst.scenarios.probs[xi] * scenario;
    }
    return total;
}

}  // namespace

Rational partial_route_lb(const Instance& inst, const PartialRoute& h) {
    Rational fwd = directed_partial_route_lb(inst, h);
    Rational bwd = directed_partial_route_lb(inst, h.reversed());
    return std::min(fwd, bwd);
}

Rational set_lb(const Instance& inst, std::span<const int> customers, int k_tilde) {
    Rational total = 0;
    for (int xi = 0; xi < inst.scenarios.count; ++xi) {
        total += inst.scenarios.probs[xi] * lb_nu(inst, Rational(0), customers, k_tilde, xi);
    }
    return total;
}

std::map<int, Rational> get_disaggregation(const Route& route, const RouteValueFn& q_oracle) {
    const std::size_t l = route.size();
    std::vector<Rational> mass(l, Rational(0));
    // A_b: collection of disjoint subroutes whose values account for the mass
    // assigned so far, as (first, last) index pairs.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> collections(l + 1);

    for (std::size_t b = 0; b < l; ++b) {
        mass[b] = 0;
        std::size_t best_a = b;
        Rational best_delta;
        bool have = false;
        Rational assigned = 0;  // sum of mass[a'..b] built from the right
        for (std::size_t a1 = b + 1; a1-- > 0;) {
            assigned += mass[a1];
            Route sub(route.begin() + a1, route.begin() + b + 1);
            Rational delta = q_oracle(sub) - assigned;
            if (!have || delta > best_delta) {
                have = true;
                best_delta = delta;
                best_a = a1;
            }
        }
        if (best_delta > 0) {
            collections[b + 1] = collections[best_a];
            collections[b + 1].push_back({best_a, b});
            mass[b] = best_delta;
        } else {
            collections[b + 1] = collections[b];
        }
    }
    Rational total = 0;
    for (const Rational& m : mass) total += m;
    Rational delta_r = q_oracle(route) - total;
    if (delta_r > 0) mass[0] += delta_r;

    std::map<int, Rational> out;
    for (std::size_t i = 0; i < l; ++i) {
        if (mass[i] != 0) out[route[i]] = mass[i];
    }
    return out;
}

bool check_weak_superadditivity(const RouteValueFn& q_oracle, const Route& route) {
    const std::size_t l = route.size();
    if (l > 12) throw std::invalid_argument("weak superadditivity check limited to length 12");
    // Max total value over families of disjoint subroutes, by interval DP.
    std::vector<Rational> best(l + 1, Rational(0));
    for (std::size_t i = 1; i <= l; ++i) {
        best[i] = best[i - 1];
        for (std::size_t j = 0; j < i; ++j) {
            Route sub(route.begin() + j, route.begin() + i);
            Rational candidate = best[j] + q_oracle(sub);
            if (candidate > best[i]) best[i] = candidate;
        }
    }
    return q_oracle(route) >= best[l];
}

}  // namespace vrpsd
