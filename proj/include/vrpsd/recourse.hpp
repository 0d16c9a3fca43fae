#pragma once

#include "vrpsd/cuts.hpp"
#include "vrpsd/instance.hpp"

#include <functional>
#include <map>
#include <span>

namespace vrpsd {

enum class Disaggregation { D1, D2 };

// Closed form of the failure count observed at a customer set by a vehicle
// that already collected `alpha`.
long fail(const Instance& inst, const Rational& alpha, std::span<const int> customers, int xi);

// Failure count per position of a directed route under one scenario. Valid
// for raw (unpreprocessed) demands as well; entries are 0/1 once demands obey
// d <= C.
std::vector<long> failures_per_customer(const Instance& inst, const Route& directed, int xi);

Rational q_classical_directed(const Instance& inst, const Route& directed);

struct OrientedRecourse {
    Rational value;
    Route orientation;  // the traversal achieving the minimum (ties: smaller first customer)
};

OrientedRecourse q_classical(const Instance& inst, const Route& route);

std::map<int, Rational> disaggregate(const Instance& inst, const Route& route,
                                     Disaggregation mode);

// Recourse of serving S with nu vehicles, alpha already on board.
Rational lb_nu(const Instance& inst, const Rational& alpha, std::span<const int> customers,
               int nu, int xi);

Rational partial_route_lb(const Instance& inst, const PartialRoute& h);

Rational set_lb(const Instance& inst, std::span<const int> customers, int k_tilde);

using RouteValueFn = std::function<Rational(const Route&)>;

// For a weakly superadditive q_oracle the result is a monotone disaggregation;
// for any nonnegative q_oracle it still sums to q_oracle(route).
std::map<int, Rational> get_disaggregation(const Route& route, const RouteValueFn& q_oracle);

// Checks Q(R) >= sum of Q over every family of disjoint subroutes.
bool check_weak_superadditivity(const RouteValueFn& q_oracle, const Route& route);

}  // namespace vrpsd
