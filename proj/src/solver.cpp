#include "vrpsd/solver.hpp"

#include "vrpsd/lp.hpp"
#include "vrpsd/recourse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>

namespace vrpsd {

void Config::validate() const {
    if (use_set_cuts && mode != Disaggregation::D2) {
        throw std::invalid_argument("set cuts require disaggregation D2");
    }
    if (sep_rounds_per_node < 0) throw std::invalid_argument("negative separation rounds");
}

SeparationConfig Config::separation() const {
    SeparationConfig sc;
    sc.mode = mode;
    sc.use_set_cuts = use_set_cuts;
    sc.activation = activation;
    sc.all_trees = all_trees;
    return sc;
}

const char* solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Limit: return "limit";
    }
    return "?";
}

int select_branch_edge(const std::vector<double>& x_edges, const Instance& inst) {
    int best = -1;
    double best_dist = 1.0;
    for (int e = 0; e < static_cast<int>(x_edges.size()); ++e) {
        double frac = x_edges[e] - std::floor(x_edges[e]);
        if (frac < 1e-6 || frac > 1 - 1e-6) continue;
        double dist = std::fabs(frac - 0.5);
        auto [u, v] = edge_ends(e, inst.n);
        double cost = to_double(inst.cost[u][v]);
        bool better = false;
        if (best == -1 || dist < best_dist - 1e-12) {
            better = true;
        } else if (std::fabs(dist - best_dist) <= 1e-12) {
            auto [bu, bv] = edge_ends(best, inst.n);
            double bcost = to_double(inst.cost[bu][bv]);
            if (cost > bcost + 1e-12) better = true;
        }
        if (better) {
            best = e;
            best_dist = dist;
        }
    }
    if (best == -1) throw std::invalid_argument("select_branch_edge called on an integer point");
    return best;
}

namespace {

struct Node {
    long id = 0;
    int depth = 0;
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<double> lo, hi;  // edge bounds
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
        if (a.depth != b.depth) return a.depth < b.depth;  // dive on ties
        return a.id > b.id;
    }
};

LpRow rci_row(const std::vector<int>& s, const Instance& inst) {
    LpRow row;
    row.sense = RowSense::LE;
    row.rhs = static_cast<double>(static_cast<int>(s.size()) -
                                  rci_rhs(s, inst).convert_to<int>());
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            row.coeffs.push_back({edge_index(s[i], s[j], inst.n), 1.0});
        }
    }
    return row;
}

// theta(U) - L * alpha^T x >= L * beta, normalized by the largest coefficient
// so the LP row tolerances see a well-scaled inequality.
LpRow cut_row(const ILSCut& cut, const Instance& inst) {
    LpRow row;
    row.sense = RowSense::GE;
    const int m = num_edges(inst.n);
    for (int v : cut.theta_support) row.coeffs.push_back({m + v - 1, 1.0});
    double scale = 1.0;
    for (const auto& [e, c] : cut.activation.coeff) {
        double coef = -to_double(cut.bound * c);
        row.coeffs.push_back({e, coef});
        scale = std::max(scale, std::fabs(coef));
    }
    row.rhs = to_double(cut.bound * cut.activation.constant);
    if (scale > 1.0) {
        for (auto& [j, c] : row.coeffs) c /= scale;
        row.rhs /= scale;
    }
    return row;
}

std::string rci_key(const std::vector<int>& s) {
    std::string key = "rci|";
    for (int v : s) key += std::to_string(v) + ",";
    return key;
}

}  // namespace

SolveResult solve(const Instance& inst, const Config& cfg, std::ostream* log) {
    cfg.validate();
    const auto start_time = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time)
            .count();
    };

    const int n = inst.n;
    const int m = num_edges(n);
    const double offset_dbl = to_double(inst.objective_offset);

    LpModel model;
    for (int e = 0; e < m; ++e) {
        auto [u, v] = edge_ends(e, n);
        double hi = (u == 0) ? 2.0 : 1.0;
        model.add_var(0.0, hi, to_double(inst.cost[u][v]));
    }
    for (int v = 1; v <= n; ++v) {
        model.add_var(0.0, std::numeric_limits<double>::infinity(), 1.0);
    }
    for (int v = 1; v <= n; ++v) {
        LpRow row;
        row.sense = RowSense::EQ;
        row.rhs = 2.0;
        for (int u = 0; u <= n; ++u) {
            if (u != v) row.coeffs.push_back({edge_index(u, v, n), 1.0});
        }
        model.add_row(std::move(row));
    }
    {
        LpRow depot;
        depot.sense = RowSense::EQ;
        depot.rhs = 2.0 * inst.fleet;
        for (int v = 1; v <= n; ++v) depot.coeffs.push_back({edge_index(0, v, n), 1.0});
        model.add_row(std::move(depot));
    }

    LpSolver lp(std::move(model));
    std::set<std::string> pool;

    SolveResult result;
    Rational incumbent_value;
    double incumbent_dbl = std::numeric_limits<double>::infinity();

    std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
    // Plunging stack: after a branch, the child on the rounding side is
    // processed immediately so incumbents appear early; backtracking picks
    // the best-bound node from the queue.
    std::vector<Node> dive;
    Node root;
    root.lo.assign(m, 0.0);
    root.hi.assign(m, 1.0);
    for (int e = 0; e < m; ++e) {
        auto [u, v] = edge_ends(e, n);
        if (u == 0) root.hi[e] = 2.0;
    }
    long next_id = 1;
    root.id = 0;
    queue.push(root);

    bool hit_limit = false;
    const SeparationConfig sep_cfg = cfg.separation();

    while (!queue.empty() || !dive.empty()) {
        if (cfg.time_limit_s > 0 && elapsed() > cfg.time_limit_s) {
            hit_limit = true;
            break;
        }
        if (cfg.node_limit > 0 && result.stats.nodes >= cfg.node_limit) {
            hit_limit = true;
            break;
        }
        Node node;
        if (!dive.empty()) {
            node = std::move(dive.back());
            dive.pop_back();
        } else {
            node = queue.top();
            queue.pop();
        }
        if (result.has_incumbent && node.bound >= incumbent_dbl - 1e-9) continue;
        ++result.stats.nodes;

        for (int e = 0; e < m; ++e) lp.set_var_bounds(e, node.lo[e], node.hi[e]);

        bool pruned = false;
        int rounds = 0;
        double node_obj = node.bound;
        long cuts_added_here = 0;
        while (true) {
            LpResult res = lp.solve();
            ++result.stats.lp_solves;
            if (res.used_exact_fallback) ++result.stats.lp_exact_fallbacks;
            if (res.status == LpStatus::Infeasible) {
                pruned = true;
                break;
            }
            node_obj = res.obj + offset_dbl;
            if (result.has_incumbent && node_obj >= incumbent_dbl - 1e-7) {
                pruned = true;
                break;
            }
            std::vector<double> x_dbl(res.x.begin(), res.x.begin() + m);
            std::vector<Rational> theta(n);
            for (int v = 1; v <= n; ++v) theta[v - 1] = rational_from_double(res.x[m + v - 1]);

            if (is_integer_point(x_dbl)) {
                EdgeVector x_int = round_to_integer_point(x_dbl, n);
                SeparationResult sep = separate_vrpsd(x_int, theta, sep_cfg, inst);
                std::vector<LpRow> new_rows;
                for (const auto& s : sep.rci_sets) {
                    if (pool.insert(rci_key(s)).second) {
                        new_rows.push_back(rci_row(s, inst));
                        ++result.stats.rci_rows;
                    }
                }
                for (const ILSCut& cut : sep.cuts) {
                    if (pool.insert(cut.dedup_key()).second) {
                        new_rows.push_back(cut_row(cut, inst));
                        ++result.stats.cuts_by_tag[cut_tag_name(cut.tag)];
                    }
                }
                if (!sep.rci_sets.empty()) {
                    if (new_rows.empty()) {
                        throw std::logic_error("integer point violates an RCI already in the LP");
                    }
                    lp.add_rows(new_rows);
                    cuts_added_here += static_cast<long>(new_rows.size());
                    continue;
                }
                if (!new_rows.empty()) {
                    // D2 set cuts found alongside no RCI: still apply them.
                    lp.add_rows(new_rows);
                    cuts_added_here += static_cast<long>(new_rows.size());
                    continue;
                }
                IncumbentCheck check = verify_incumbent(x_int, theta, sep_cfg, inst);
                std::vector<LpRow> rows;
                if (!check.accepted) {
                    for (const ILSCut& cut : check.cuts) {
                        if (pool.insert(cut.dedup_key()).second) {
                            rows.push_back(cut_row(cut, inst));
                            ++result.stats.cuts_by_tag[cut_tag_name(cut.tag)];
                        }
                    }
                }
                if (check.accepted || rows.empty()) {
                    // Either theta certifies the recourse, or every route cut
                    // is already in the LP and the shortfall is row-tolerance
                    // noise; the incumbent value is recomputed exactly.
                    RoutingPlan plan = routing_plan_from_edges(x_int, n);
                    Rational value = inst.objective_offset;
                    Rational recourse = 0;
                    for (const Route& r : plan.routes) {
                        value += inst.route_cost(r);
                        recourse += q_classical(inst, r).value;
                    }
                    value += recourse;
                    if (!check.accepted) {
                        Rational theta_total = 0;
                        for (const Rational& t : theta) theta_total += t;
                        Rational slack = recourse - theta_total;
                        if (slack > Rational(1, 10000)) {
                            throw std::logic_error(
                                "incumbent rejected but no new route cut is violated");
                        }
                    }
                    if (!result.has_incumbent || value < incumbent_value) {
                        incumbent_value = value;
                        incumbent_dbl = to_double(value);
                        result.has_incumbent = true;
                        result.plan = canonical_plan(plan);
                    }
                    pruned = true;
                    break;
                }
                lp.add_rows(rows);
                cuts_added_here += static_cast<long>(rows.size());
                continue;
            }

            // Fractional point.
            if (cfg.fractional_separation && rounds < cfg.sep_rounds_per_node) {
                ++rounds;
                separation_counters().fractional_points.fetch_add(1,
                                                                  std::memory_order_relaxed);
                EdgeVector x_rat(m);
                for (int e = 0; e < m; ++e) x_rat[e] = rational_from_double(x_dbl[e]);
                SeparationResult sep = separate_vrpsd(x_rat, theta, sep_cfg, inst);
                std::vector<LpRow> new_rows;
                for (const auto& s : sep.rci_sets) {
                    if (pool.insert(rci_key(s)).second) {
                        new_rows.push_back(rci_row(s, inst));
                        ++result.stats.rci_rows;
                    }
                }
                for (const ILSCut& cut : sep.cuts) {
                    if (pool.insert(cut.dedup_key()).second) {
                        new_rows.push_back(cut_row(cut, inst));
                        ++result.stats.cuts_by_tag[cut_tag_name(cut.tag)];
                    }
                }
                if (!new_rows.empty()) {
                    lp.add_rows(new_rows);
                    cuts_added_here += static_cast<long>(new_rows.size());
                    continue;
                }
            }

            // Branch; dive into the child on the rounding side.
            int e = select_branch_edge(x_dbl, inst);
            double val = x_dbl[e];
            Node down = node;
            down.id = next_id++;
            down.depth = node.depth + 1;
            down.bound = node_obj;
            down.hi[e] = std::floor(val);
            Node up = node;
            up.id = next_id++;
            up.depth = node.depth + 1;
            up.bound = node_obj;
            up.lo[e] = std::ceil(val);
            if (val - std::floor(val) >= 0.5) {
                queue.push(std::move(down));
                dive.push_back(std::move(up));
            } else {
                queue.push(std::move(up));
                dive.push_back(std::move(down));
            }
            break;
        }
        if (log) {
            (*log) << "node " << node.id << " depth " << node.depth << " lp " << node_obj
                   << " cuts " << cuts_added_here << (pruned ? " pruned" : "") << "\n";
        }
    }

    result.stats.wall_seconds = elapsed();
    // Best-bound order makes the top of the queue the weakest open bound;
    // dive nodes can carry weaker bounds than the queue top.
    double open_bound =
        queue.empty() ? std::numeric_limits<double>::infinity() : queue.top().bound;
    for (const Node& d : dive) open_bound = std::min(open_bound, d.bound);

    if (hit_limit) {
        result.status = SolveStatus::Limit;
        result.dual_bound = std::min(open_bound, incumbent_dbl);
        if (std::isinf(result.dual_bound)) result.dual_bound = -offset_dbl;
    } else if (result.has_incumbent) {
        result.status = SolveStatus::Optimal;
        result.dual_bound = incumbent_dbl;
    } else {
        result.status = SolveStatus::Infeasible;
        result.dual_bound = std::numeric_limits<double>::infinity();
    }

    if (result.has_incumbent) {
        result.primal_value = incumbent_value;
        result.theta.assign(n, Rational(0));
        for (const Route& r : result.plan.routes) {
            for (const auto& [v, q] : disaggregate(inst, r, cfg.mode)) {
                result.theta[v - 1] += q;
            }
        }
        double denom = std::max(1e-9, std::fabs(incumbent_dbl));
        result.gap = result.status == SolveStatus::Optimal
                         ? 0.0
                         : (incumbent_dbl - result.dual_bound) / denom;
    } else {
        result.gap = std::numeric_limits<double>::infinity();
    }

    if (!cfg.lp_dump_path.empty()) {
        std::ofstream out(cfg.lp_dump_path);
        out << lp.write_lp_format();
    }
    return result;
}

}  // namespace vrpsd
