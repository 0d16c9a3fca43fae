#pragma once

#include "vrpsd/rational.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrpsd {

// Vertices are 0..n with 0 the depot; customers are 1..n.
// Edges of the complete graph are indexed lexicographically by (u, v), u < v.
inline int num_edges(int n_customers) {
    return (n_customers + 1) * n_customers / 2;
}

inline int edge_index(int u, int v, int n_customers) {
    if (u > v) std::swap(u, v);
    int n_vertices = n_customers + 1;
    return u * (2 * n_vertices - u - 1) / 2 + (v - u - 1);
}

std::pair<int, int> edge_ends(int e, int n_customers);

// Customer sequence, depot implicit at both ends. Undirected semantics are
// recovered through canonical_route(); a plain vector read left-to-right acts
// as the directed route.
using Route = std::vector<int>;

Route canonical_route(const Route& r);
Route reversed(const Route& r);

struct RoutingPlan {
    std::vector<Route> routes;

    bool operator==(const RoutingPlan& other) const;
};

RoutingPlan canonical_plan(const RoutingPlan& plan);

// Rational value per edge; depot edges may carry 2 (single-customer routes).
using EdgeVector = std::vector<Rational>;

struct ScenarioSet {
    int count = 0;
    std::vector<std::vector<Rational>> demands;  // count rows, n entries each (customer v at index v-1)
    std::vector<Rational> probs;
};

struct Instance {
    int n = 0;  // number of customers
    std::vector<std::vector<Rational>> cost;  // (n+1) x (n+1), symmetric, zero diagonal
    Rational capacity;
    int fleet = 0;
    ScenarioSet scenarios;
    Rational objective_offset;  // accumulated by preprocessing

    std::vector<Rational> expected_demand;  // index by customer id, [0] unused

    int num_vertices() const { return n + 1; }

    const Rational& demand(int scenario, int customer) const {
        return scenarios.demands[scenario][customer - 1];
    }

    Rational demand_sum(int scenario, std::span<const int> customers) const;
    Rational expected_demand_sum(std::span<const int> customers) const;
    Rational route_cost(const Route& r) const;

    // Recomputes expected demands and checks all invariants; throws on violation.
    void finalize();
};

struct ParseOptions {
    bool round_euclidean = false;  // TSPLIB-style nearest-integer distances for coordinate input
};

Instance parse_instance(const std::string& text, const ParseOptions& opts = {});
std::string write_instance(const Instance& inst);

enum class DemandModel { Independent, Correlated };

struct GenParams {
    int n = 5;
    int k = 2;
    Rational capacity = 100;
    int n_scenarios = 10;
    DemandModel mode = DemandModel::Independent;
    std::uint64_t seed = 0;
    double sigma_factor = 0.3;      // sigma_v = sigma_factor * mu_v
    double correlation_scale = 0;   // 0 = average inter-customer distance
    bool round_costs = true;
    // Optional depot + customer locations (n+1 points); empty = random layout.
    std::vector<std::pair<double, double>> fixed_coords;
};

Instance generate_instance(const GenParams& params);

// Shifts every demand above capacity down by a multiple of C and charges the
// matching expected back-and-forth trips to objective_offset.
Instance preprocess_demands(const Instance& inst);

struct SubtourError : std::runtime_error {
    std::vector<int> cycle;
    explicit SubtourError(std::vector<int> cycle_vertices);
};

struct DegreeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RoutingPlan routing_plan_from_edges(const EdgeVector& x, int n_customers);
EdgeVector edges_from_plan(const RoutingPlan& plan, int n_customers);

BigInt rci_rhs(std::span<const int> customers, const Instance& inst);
bool plan_is_feasible(const RoutingPlan& plan, const Instance& inst);

}  // namespace vrpsd
