#pragma once

#include "vrpsd/instance.hpp"

#include <map>
#include <string>
#include <vector>

namespace vrpsd {

// Ordered tuple of pairwise-disjoint customer sets; sets of size > 1 are
// "unstructured" and no two of them may be adjacent.
struct PartialRoute {
    std::vector<std::vector<int>> sets;  // each sorted ascending

    PartialRoute() = default;
    explicit PartialRoute(std::vector<std::vector<int>> s);

    std::size_t length() const { return sets.size(); }
    std::vector<int> customers() const;  // sorted union
    int customer_count() const;
    PartialRoute reversed() const;
};

// H with every set a singleton, in the route's order.
PartialRoute partial_route_of_route(const Route& r);

bool exactly_adheres(const Route& r, const PartialRoute& h);
bool adheres(const Route& r, const PartialRoute& h);
bool plan_exactly_adheres(const RoutingPlan& plan, const PartialRoute& h);
bool plan_adheres(const RoutingPlan& plan, const PartialRoute& h);

// alpha^T x + beta over edge variables.
struct AffineForm {
    std::map<int, Rational> coeff;
    Rational constant;

    Rational eval(const EdgeVector& x) const;
    void add_edge(int e, const Rational& c);
    // x(A) over all intra-set pairs, scaled.
    void add_intra(const std::vector<int>& set, int n, const Rational& scale);
    // x(A, B) over disjoint sets, scaled.
    void add_cross(const std::vector<int>& a, const std::vector<int>& b, int n,
                   const Rational& scale);
};

enum class CutTag { Gendreau, RouteCut, PrExactAdherence, PrAdherence, Path, SetCut, Translated };

const char* cut_tag_name(CutTag tag);

// theta(U) >= bound * activation(x), materialized as
// theta(U) - bound * (alpha^T x) >= bound * beta.
struct ILSCut {
    std::vector<int> theta_support;  // sorted customer ids
    Rational bound;
    AffineForm activation;
    CutTag tag = CutTag::RouteCut;

    std::string dedup_key() const;
};

AffineForm activation_gendreau(const EdgeVector& x_bar, int n_customers, int fleet);
AffineForm activation_wof_superset(const PartialRoute& h, int n_customers);
AffineForm activation_wof_exact(const PartialRoute& h, int n_customers);
AffineForm activation_whs(const PartialRoute& h, int n_customers);
AffineForm activation_set(const std::vector<int>& customers, int k_tilde, int n_customers);

ILSCut make_cut(std::vector<int> theta_support, const Rational& bound, AffineForm activation,
                CutTag tag);

// Translation by globally valid lower bounds: the bound drops
// by LB(U) and clamps at zero.
ILSCut translate_cut(const ILSCut& cut, const std::vector<Rational>& global_lb);

}  // namespace vrpsd
