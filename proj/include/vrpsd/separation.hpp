#pragma once

#include "vrpsd/cuts.hpp"
#include "vrpsd/instance.hpp"
#include "vrpsd/recourse.hpp"

#include <atomic>
#include <vector>

namespace vrpsd {

enum class ActivationKind { WHS, WOF };

struct SeparationConfig {
    Disaggregation mode = Disaggregation::D2;
    bool use_set_cuts = false;          // valid only under D2
    ActivationKind activation = ActivationKind::WHS;
    bool all_trees = false;             // lift the depot-flow-2 restriction
};

struct BlockCutNode {
    bool is_block = false;
    std::vector<int> vertices;   // customers only (dummies stripped), sorted
    std::vector<int> neighbors;  // node indices within the tree
};

struct BlockCutTree {
    std::vector<BlockCutNode> nodes;
    Rational depot_flow;  // x(0, V_+(T))
    std::vector<int> customers() const;
    bool is_path() const;
};

struct BlockCutForest {
    std::vector<BlockCutTree> trees;
};

struct SeparationCounters {
    std::atomic<long> fractional_points{0};
    std::atomic<long> flow2_trees{0};
};

SeparationCounters& separation_counters();

// Auxiliary-graph block-cut forest of the support graph; verifies on the fly
// that every tree with depot flow two is a path.
BlockCutForest build_block_cut_forest(const EdgeVector& x_bar, const Instance& inst);

std::vector<PartialRoute> get_partial_routes(const EdgeVector& x_bar,
                                             const std::vector<Rational>& theta_bar,
                                             const Instance& inst, bool all_trees = false);

// Exact at integer points (decode + overload/subtour check), heuristic at
// fractional ones (support components grown by flow).
std::vector<std::vector<int>> separate_rci(const EdgeVector& x_bar, const Instance& inst,
                                           bool at_integer);

struct SeparationResult {
    std::vector<std::vector<int>> rci_sets;
    std::vector<ILSCut> cuts;
};

SeparationResult separate_vrpsd(const EdgeVector& x_bar, const std::vector<Rational>& theta_bar,
                                const SeparationConfig& cfg, const Instance& inst);

struct IncumbentCheck {
    bool accepted = false;
    std::vector<ILSCut> cuts;
};

IncumbentCheck verify_incumbent(const EdgeVector& x_bar, const std::vector<Rational>& theta_bar,
                                const SeparationConfig& cfg, const Instance& inst);

// Snaps a near-integer LP vector onto the integer lattice; throws DegreeError
// when some component is not integral within tol.
EdgeVector round_to_integer_point(const std::vector<double>& x, int n_customers,
                                  double tol = 1e-6);

bool is_integer_point(const std::vector<double>& x, double tol = 1e-6);

}  // namespace vrpsd
