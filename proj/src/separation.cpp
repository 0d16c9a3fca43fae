#include "vrpsd/separation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace vrpsd {

namespace {

// Support threshold for fractional LP values and the violation tolerance used
// by every cut-generation check.
const Rational kSupportTol = Rational(1, 1000000000);        // 1e-9
const Rational kViolationTol = Rational(1, 10000000);        // 1e-7
const Rational kDummyTol = Rational(1, 1000000);             // 1e-6

Rational depot_value(const EdgeVector& x, int v, int n) { return x[edge_index(0, v, n)]; }

}  // namespace

SeparationCounters& separation_counters() {
    static SeparationCounters counters;
    return counters;
}

std::vector<int> BlockCutTree::customers() const {
    std::set<int> all;
    for (const auto& node : nodes) all.insert(node.vertices.begin(), node.vertices.end());
    return {all.begin(), all.end()};
}

bool BlockCutTree::is_path() const {
    for (const auto& node : nodes) {
        if (node.neighbors.size() > 2) return false;
    }
    return true;
}

BlockCutForest build_block_cut_forest(const EdgeVector& x_bar, const Instance& inst) {
    const int n = inst.n;
    // Auxiliary graph: customers 1..n, dummy of v = n + v.
    const int aux_size = 2 * n + 1;
    std::vector<std::vector<int>> adj(aux_size);
    auto add_aux_edge = [&](int u, int v) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    };
    for (int u = 1; u <= n; ++u) {
        for (int v = u + 1; v <= n; ++v) {
            if (x_bar[edge_index(u, v, n)] > kSupportTol) add_aux_edge(u, v);
        }
    }
    std::vector<bool> has_dummy(n + 1, false);
    for (int v = 1; v <= n; ++v) {
        if (depot_value(x_bar, v, n) >= Rational(1) - kDummyTol) {
            has_dummy[v] = true;
            add_aux_edge(v, n + v);
        }
    }

    // Hopcroft-Tarjan biconnected components.
    std::vector<int> disc(aux_size, -1), low(aux_size, 0), comp(aux_size, -1);
    std::vector<bool> is_cut(aux_size, false);
    std::vector<std::vector<std::vector<int>>> blocks_of_comp;
    std::vector<std::pair<int, int>> edge_stack;
    int timer = 0;

    std::function<void(int, int, int)> dfs = [&](int u, int parent, int c) {
        const bool is_root = parent == -1;
        disc[u] = low[u] = timer++;
        comp[u] = c;
        int children = 0;
        for (int w : adj[u]) {
            if (w == parent) {
                parent = -2;  // consume one parallel edge back to the parent
                continue;
            }
            if (disc[w] == -1) {
                ++children;
                edge_stack.push_back({u, w});
                dfs(w, u, c);
                low[u] = std::min(low[u], low[w]);
                if (low[w] >= disc[u]) {
                    if (!is_root || children > 1) is_cut[u] = true;
                    std::set<int> members;
                    while (!edge_stack.empty()) {
                        auto [a, b] = edge_stack.back();
                        edge_stack.pop_back();
                        members.insert(a);
                        members.insert(b);
                        if (a == u && b == w) break;
                    }
                    blocks_of_comp[c].push_back({members.begin(), members.end()});
                }
            } else if (disc[w] < disc[u]) {
                edge_stack.push_back({u, w});
                low[u] = std::min(low[u], disc[w]);
            }
        }
    };

    int n_comp = 0;
    for (int v = 1; v <= n; ++v) {
        bool present = !adj[v].empty();
        if (!present) continue;
        if (disc[v] != -1) continue;
        blocks_of_comp.push_back({});
        dfs(v, -1, n_comp);
        if (blocks_of_comp[n_comp].empty()) blocks_of_comp[n_comp].push_back({v});
        ++n_comp;
    }

    BlockCutForest forest;
    for (int c = 0; c < n_comp; ++c) {
        BlockCutTree tree;
        std::map<int, int> cut_node_of;  // aux vertex -> tree node index
        for (int v = 1; v <= n; ++v) {
            if (comp[v] == c && is_cut[v]) {
                BlockCutNode node;
                node.is_block = false;
                node.vertices = {v};
                cut_node_of[v] = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back(std::move(node));
            }
        }
        for (const auto& members : blocks_of_comp[c]) {
            BlockCutNode node;
            node.is_block = true;
            for (int u : members) {
                if (u <= n) node.vertices.push_back(u);
            }
            std::sort(node.vertices.begin(), node.vertices.end());
            int idx = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(node);
            for (int u : members) {
                auto it = cut_node_of.find(u);
                if (it != cut_node_of.end()) {
                    tree.nodes[idx].neighbors.push_back(it->second);
                    tree.nodes[it->second].neighbors.push_back(idx);
                }
            }
        }
        tree.depot_flow = 0;
        for (int v : tree.customers()) tree.depot_flow += depot_value(x_bar, v, inst.n);
        Rational gap = tree.depot_flow - 2;
        if (gap < 0) gap = -gap;
        if (gap <= kDummyTol) {
            separation_counters().flow2_trees.fetch_add(1, std::memory_order_relaxed);
            if (!tree.is_path()) {
                throw std::logic_error("block-cut tree with depot flow 2 is not a path");
            }
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

namespace {

int node_key(const BlockCutNode& node) {
    return node.vertices.empty() ? 0 : node.vertices.front();
}

std::vector<int> tree_path(const BlockCutTree& tree, int from, int to) {
    std::vector<int> parent(tree.nodes.size(), -1);
    std::vector<int> stack = {from};
    std::vector<bool> seen(tree.nodes.size(), false);
    seen[from] = true;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (u == to) break;
        for (int w : tree.nodes[u].neighbors) {
            if (!seen[w]) {
                seen[w] = true;
                parent[w] = u;
                stack.push_back(w);
            }
        }
    }
    std::vector<int> path;
    for (int u = to; u != -1; u = parent[u]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    return path;
}

// Cut vertices stay singletons; a block contributes its non-cut customers as
// one unstructured component.
PartialRoute partial_route_from_path(const BlockCutTree& tree, const std::vector<int>& path,
                                     const std::set<int>& cut_vertices) {
    std::vector<std::vector<int>> sets;
    for (int idx : path) {
        const BlockCutNode& node = tree.nodes[idx];
        if (node.is_block) {
            std::vector<int> inner;
            for (int v : node.vertices) {
                if (!cut_vertices.count(v)) inner.push_back(v);
            }
            if (!inner.empty()) sets.push_back(std::move(inner));
        } else {
            sets.push_back(node.vertices);
        }
    }
    return PartialRoute(std::move(sets));
}

}  // namespace

std::vector<PartialRoute> get_partial_routes(const EdgeVector& x_bar,
                                             const std::vector<Rational>& theta_bar,
                                             const Instance& inst, bool all_trees) {
    (void)theta_bar;  // violation is checked by the caller against each candidate
    BlockCutForest forest = build_block_cut_forest(x_bar, inst);
    std::vector<PartialRoute> out;
    std::set<std::string> seen;
    for (const BlockCutTree& tree : forest.trees) {
        if (!all_trees) {
            Rational gap = tree.depot_flow - 2;
            if (gap < 0) gap = -gap;
            if (gap > kDummyTol) continue;
        }
        std::set<int> cut_vertices;
        for (const auto& node : tree.nodes) {
            if (!node.is_block) cut_vertices.insert(node.vertices.front());
        }
        std::vector<int> leaves;
        for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
            if (tree.nodes[i].neighbors.size() <= 1) leaves.push_back(i);
        }
        auto emit = [&](const std::vector<int>& path) {
            PartialRoute h = partial_route_from_path(tree, path, cut_vertices);
            if (h.sets.empty()) return;
            // Symmetric duplicates: keep the orientation with the smaller key.
            PartialRoute rev = h.reversed();
            std::string key_fwd, key_rev;
            for (const auto& s : h.sets) {
                for (int v : s) key_fwd += std::to_string(v) + ",";
                key_fwd += ";";
            }
            for (const auto& s : rev.sets) {
                for (int v : s) key_rev += std::to_string(v) + ",";
                key_rev += ";";
            }
            const PartialRoute& canon = key_fwd <= key_rev ? h : rev;
            const std::string& key = key_fwd <= key_rev ? key_fwd : key_rev;
            if (seen.insert(key).second) out.push_back(canon);
        };
        if (tree.nodes.size() == 1) {
            emit({0});
            continue;
        }
        for (std::size_t a = 0; a < leaves.size(); ++a) {
            for (std::size_t b = a + 1; b < leaves.size(); ++b) {
                int la = leaves[a], lb = leaves[b];
                if (node_key(tree.nodes[lb]) < node_key(tree.nodes[la])) std::swap(la, lb);
                emit(tree_path(tree, la, lb));
            }
        }
    }
    return out;
}

bool is_integer_point(const std::vector<double>& x, double tol) {
    for (double v : x) {
        if (std::fabs(v - std::round(v)) > tol) return false;
    }
    return true;
}

EdgeVector round_to_integer_point(const std::vector<double>& x, int n_customers, double tol) {
    EdgeVector out(x.size());
    for (std::size_t e = 0; e < x.size(); ++e) {
        double r = std::round(x[e]);
        if (std::fabs(x[e] - r) > tol) {
            throw DegreeError("edge value is not integral");
        }
        out[e] = Rational(static_cast<long long>(r));
    }
    (void)n_customers;
    return out;
}

std::vector<std::vector<int>> separate_rci(const EdgeVector& x_bar, const Instance& inst,
                                           bool at_integer) {
    const int n = inst.n;
    std::vector<std::vector<int>> found;
    if (at_integer) {
        try {
            RoutingPlan plan = routing_plan_from_edges(x_bar, n);
            for (const Route& r : plan.routes) {
                if (inst.expected_demand_sum(r) > inst.capacity) {
                    std::vector<int> s = r;
                    std::sort(s.begin(), s.end());
                    found.push_back(std::move(s));
                }
            }
            // Depot degree 2k forces exactly k depot-anchored cycles; the
            // check is kept as a safeguard.
            if (static_cast<int>(plan.routes.size()) != inst.fleet && found.empty()) {
                throw DegreeError("integer point uses the wrong number of routes");
            }
        } catch (const SubtourError& e) {
            std::vector<int> s = e.cycle;
            std::sort(s.begin(), s.end());
            found.push_back(std::move(s));
        }
        return found;
    }

    // Fractional heuristic: support components without the depot, then greedy
    // growth from each customer by maximum flow into the current set.
    std::set<std::vector<int>> unique;
    auto violation = [&](const std::vector<int>& s) {
        Rational inside = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                inside += x_bar[edge_index(s[i], s[j], n)];
            }
        }
        return inside - Rational(static_cast<int>(s.size())) + Rational(rci_rhs(s, inst));
    };
    auto consider = [&](std::vector<int> s) {
        if (s.empty()) return;
        std::sort(s.begin(), s.end());
        if (violation(s) > kViolationTol) unique.insert(std::move(s));
    };

    std::vector<int> comp_id(n + 1, -1);
    int n_comp = 0;
    for (int v = 1; v <= n; ++v) {
        if (comp_id[v] != -1) continue;
        std::vector<int> stack = {v};
        comp_id[v] = n_comp;
        std::vector<int> members;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            members.push_back(u);
            for (int w = 1; w <= n; ++w) {
                if (w != u && comp_id[w] == -1 &&
                    x_bar[edge_index(u, w, n)] > kSupportTol) {
                    comp_id[w] = n_comp;
                    stack.push_back(w);
                }
            }
        }
        consider(members);
        ++n_comp;
    }

    for (int seed = 1; seed <= n; ++seed) {
        std::vector<bool> in_set(n + 1, false);
        std::vector<int> s = {seed};
        in_set[seed] = true;
        Rational best = violation(s);
        while (static_cast<int>(s.size()) < n) {
            int pick = -1;
            Rational pick_flow = 0;
            for (int w = 1; w <= n; ++w) {
                if (in_set[w]) continue;
                Rational flow = 0;
                for (int u : s) flow += x_bar[edge_index(u, w, n)];
                if (pick == -1 || flow > pick_flow) {
                    pick = w;
                    pick_flow = flow;
                }
            }
            if (pick == -1 || pick_flow <= kSupportTol) break;
            s.push_back(pick);
            in_set[pick] = true;
            Rational v = violation(s);
            if (v > kViolationTol) consider(s);
            if (v > best) best = v;
        }
    }
    found.assign(unique.begin(), unique.end());
    return found;
}

namespace {

Rational theta_sum(const std::vector<Rational>& theta, const std::vector<int>& support) {
    Rational total = 0;
    for (int v : support) total += theta.at(v - 1);
    return total;
}

AffineForm exact_adherence_activation(const PartialRoute& h, const SeparationConfig& cfg,
                                      int n) {
    return cfg.activation == ActivationKind::WHS ? activation_whs(h, n)
                                                 : activation_wof_exact(h, n);
}

bool violated(const Rational& lhs, const Rational& rhs) { return lhs < rhs - kViolationTol; }

}  // namespace

SeparationResult separate_vrpsd(const EdgeVector& x_bar, const std::vector<Rational>& theta_bar,
                                const SeparationConfig& cfg, const Instance& inst) {
    SeparationResult result;
    const int n = inst.n;
    bool integral = true;
    for (const Rational& v : x_bar) {
        if (denominator(v) != 1) {
            integral = false;
            break;
        }
    }
    result.rci_sets = separate_rci(x_bar, inst, integral);
    for (const auto& s : result.rci_sets) {
        if (cfg.mode == Disaggregation::D2 && cfg.use_set_cuts) {
            int k_tilde = rci_rhs(s, inst).convert_to<int>();
            Rational bound = set_lb(inst, s, k_tilde);
            if (bound <= 0) continue;
            AffineForm w = activation_set(s, k_tilde, n);
            if (violated(theta_sum(theta_bar, s), bound * w.eval(x_bar))) {
                result.cuts.push_back(make_cut(s, bound, std::move(w), CutTag::SetCut));
            }
        }
    }
    if (!result.rci_sets.empty()) return result;

    std::vector<PartialRoute> candidates =
        get_partial_routes(x_bar, theta_bar, inst, cfg.all_trees);
    for (const PartialRoute& h : candidates) {
        std::vector<int> support = h.customers();
        Rational lb = partial_route_lb(inst, h);
        if (cfg.mode == Disaggregation::D1) {
            if (lb <= 0) continue;
            int v = support.front();
            AffineForm w = exact_adherence_activation(h, cfg, n);
            if (violated(theta_bar.at(v - 1), lb * w.eval(x_bar))) {
                result.cuts.push_back(make_cut({v}, lb, std::move(w), CutTag::PrExactAdherence));
            }
            continue;
        }
        bool added_set_cut = false;
        if (cfg.use_set_cuts) {
            int k_tilde = rci_rhs(support, inst).convert_to<int>();
            Rational bound = set_lb(inst, support, k_tilde);
            if (bound > 0) {
                AffineForm w = activation_set(support, k_tilde, n);
                if (violated(theta_sum(theta_bar, support), bound * w.eval(x_bar))) {
                    result.cuts.push_back(
                        make_cut(support, bound, std::move(w), CutTag::SetCut));
                    added_set_cut = true;
                }
            }
        }
        if (!added_set_cut && lb > 0) {
            AffineForm w = exact_adherence_activation(h, cfg, n);
            if (violated(theta_sum(theta_bar, support), lb * w.eval(x_bar))) {
                result.cuts.push_back(
                    make_cut(support, lb, std::move(w), CutTag::PrExactAdherence));
            }
        }
    }
    return result;
}

IncumbentCheck verify_incumbent(const EdgeVector& x_bar, const std::vector<Rational>& theta_bar,
                                const SeparationConfig& cfg, const Instance& inst) {
    for (const Rational& v : x_bar) {
        if (denominator(v) != 1) throw DegreeError("verify_incumbent needs an integer point");
    }
    const Rational kAcceptTol = Rational(1, 1000000000);  // 1e-9
    RoutingPlan plan = routing_plan_from_edges(x_bar, inst.n);
    Rational total_recourse = 0;
    std::vector<std::pair<Route, Rational>> route_values;
    for (const Route& r : plan.routes) {
        Rational q = q_classical(inst, r).value;
        total_recourse += q;
        route_values.push_back({r, q});
    }
    Rational theta_total = 0;
    for (const Rational& t : theta_bar) theta_total += t;

    IncumbentCheck out;
    if (theta_total >= total_recourse - kAcceptTol) {
        out.accepted = true;
        return out;
    }
    for (const auto& [r, q] : route_values) {
        if (q <= 0) continue;
        PartialRoute h = partial_route_of_route(r);
        AffineForm w = cfg.activation == ActivationKind::WHS ? activation_whs(h, inst.n)
                                                             : activation_wof_exact(h, inst.n);
        std::vector<int> support;
        if (cfg.mode == Disaggregation::D1) {
            support = {*std::min_element(r.begin(), r.end())};
        } else {
            support = r;
            std::sort(support.begin(), support.end());
        }
        if (theta_sum(theta_bar, support) < q) {
            out.cuts.push_back(make_cut(support, q, std::move(w), CutTag::RouteCut));
        }
    }
    return out;
}

}  // namespace vrpsd
