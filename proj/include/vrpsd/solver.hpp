#pragma once

#include "vrpsd/instance.hpp"
#include "vrpsd/separation.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace vrpsd {

struct Config {
    Disaggregation mode = Disaggregation::D2;
    bool use_set_cuts = false;  // requires mode == D2
    ActivationKind activation = ActivationKind::WHS;
    double time_limit_s = 0;    // 0 = unlimited
    long node_limit = 0;        // 0 = unlimited
    int sep_rounds_per_node = 25;
    bool fractional_separation = true;
    bool all_trees = false;
    std::string lp_dump_path;  // write the final node LP when set

    void validate() const;
    SeparationConfig separation() const;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Limit };

const char* solve_status_name(SolveStatus s);

struct SolveStats {
    long nodes = 0;
    long lp_solves = 0;
    long lp_exact_fallbacks = 0;
    std::map<std::string, long> cuts_by_tag;
    long rci_rows = 0;
    double wall_seconds = 0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    bool has_incumbent = false;
    RoutingPlan plan;
    std::vector<Rational> theta;  // exact per-customer recourse of the incumbent
    Rational primal_value;        // exact, includes objective_offset
    double dual_bound = 0;        // includes objective_offset
    double gap = 0;               // relative
    SolveStats stats;
};

// Branch and cut over the edge formulation: lazy exact separation at integer
// points, heuristic separation at fractional ones, best-bound node selection,
// branching on the most fractional edge.
SolveResult solve(const Instance& inst, const Config& cfg, std::ostream* log = nullptr);

// Most fractional edge (closest to one half); ties broken toward the larger
// cost and then the smaller edge id. Throws on an integer vector.
int select_branch_edge(const std::vector<double>& x_edges, const Instance& inst);

}  // namespace vrpsd
