#include "vrpsd/instance.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace vrpsd {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kProbSumTol = 1e-9;

Rational rational_from_json(const json& j, const char* what) {
    if (j.is_string()) {
        return parse_rational(j.get<std::string>());
    }
    if (j.is_number_integer()) {
        return Rational(static_cast<long long>(j.get<std::int64_t>()));
    }
    if (j.is_number_unsigned()) {
        return Rational(static_cast<unsigned long long>(j.get<std::uint64_t>()));
    }
    if (j.is_number_float()) {
        // Reinterpret the double through its shortest round-trip decimal, so a
        // literal like 0.4 in the document means exactly 2/5.
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
        double shorter;
        for (int prec = 1; prec <= 17; ++prec) {
            char b[64];
            std::snprintf(b, sizeof(b), "%.*g", prec, j.get<double>());
            shorter = std::strtod(b, nullptr);
            if (shorter == j.get<double>()) {
                return parse_rational(b);
            }
        }
        return parse_rational(buf);
    }
    throw std::runtime_error(std::string("expected number for ") + what);
}

ordered_json rational_to_json(const Rational& q) {
    if (denominator(q) == 1) {
        BigInt num = numerator(q);
        if (num >= std::numeric_limits<std::int64_t>::min() &&
            num <= std::numeric_limits<std::int64_t>::max()) {
            return ordered_json(num.convert_to<std::int64_t>());
        }
    }
    return ordered_json(format_rational(q));
}

}  // namespace

std::pair<int, int> edge_ends(int e, int n_customers) {
    int n_vertices = n_customers + 1;
    for (int u = 0; u < n_vertices; ++u) {
        int row = n_vertices - u - 1;
        if (e < row) return {u, u + 1 + e};
        e -= row;
    }
    throw std::out_of_range("edge index out of range");
}

Route canonical_route(const Route& r) {
    if (r.size() <= 1) return r;
    Route rev(r.rbegin(), r.rend());
    return std::min(r, rev);
}

Route reversed(const Route& r) { return Route(r.rbegin(), r.rend()); }

bool RoutingPlan::operator==(const RoutingPlan& other) const {
    return canonical_plan(*this).routes == canonical_plan(other).routes;
}

RoutingPlan canonical_plan(const RoutingPlan& plan) {
    RoutingPlan out;
    out.routes.reserve(plan.routes.size());
    for (const Route& r : plan.routes) out.routes.push_back(canonical_route(r));
    std::sort(out.routes.begin(), out.routes.end());
    return out;
}

Rational Instance::demand_sum(int scenario, std::span<const int> customers) const {
    Rational total = 0;
    for (int v : customers) total += demand(scenario, v);
    return total;
}

Rational Instance::expected_demand_sum(std::span<const int> customers) const {
    Rational total = 0;
    for (int v : customers) total += expected_demand[v];
    return total;
}

Rational Instance::route_cost(const Route& r) const {
    if (r.empty()) return Rational(0);
    Rational total = cost[0][r.front()] + cost[0][r.back()];
    if (r.size() == 1) return total;  // multiplicity 2 on {0, v}
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        total += cost[r[i]][r[i + 1]];
    }
    return total;
}

void Instance::finalize() {
    if (n < 1) throw std::runtime_error("instance needs at least one customer");
    if (capacity <= 0) throw std::runtime_error("capacity must be positive");
    if (fleet < 1) throw std::runtime_error("fleet must be positive");
    if (static_cast<int>(cost.size()) != n + 1) {
        throw std::runtime_error("cost matrix must be (n+1) x (n+1)");
    }
    for (int u = 0; u <= n; ++u) {
        if (static_cast<int>(cost[u].size()) != n + 1) {
            throw std::runtime_error("cost matrix must be (n+1) x (n+1)");
        }
        if (cost[u][u] != 0) throw std::runtime_error("cost diagonal must be zero");
        for (int v = 0; v <= n; ++v) {
            if (cost[u][v] < 0) throw std::runtime_error("costs must be nonnegative");
            if (cost[u][v] != cost[v][u]) throw std::runtime_error("costs must be symmetric");
        }
    }
    if (scenarios.count < 1) throw std::runtime_error("need at least one scenario");
    if (static_cast<int>(scenarios.demands.size()) != scenarios.count ||
        static_cast<int>(scenarios.probs.size()) != scenarios.count) {
        throw std::runtime_error("scenario table size mismatch");
    }
    Rational prob_sum = 0;
    for (const Rational& p : scenarios.probs) {
        if (p < 0) throw std::runtime_error("probabilities must be nonnegative");
        prob_sum += p;
    }
    if (prob_sum != 1) throw std::runtime_error("probabilities must sum to one");
    expected_demand.assign(n + 1, Rational(0));
    for (int xi = 0; xi < scenarios.count; ++xi) {
        if (static_cast<int>(scenarios.demands[xi].size()) != n) {
            throw std::runtime_error("scenario demand row has wrong length");
        }
        for (int v = 1; v <= n; ++v) {
            const Rational& d = demand(xi, v);
            if (d < 0) throw std::runtime_error("demands must be nonnegative");
            expected_demand[v] += scenarios.probs[xi] * d;
        }
    }
    for (int v = 1; v <= n; ++v) {
        if (expected_demand[v] <= 0) {
            throw std::runtime_error("expected demand of customer " + std::to_string(v) +
                                     " must be strictly positive");
        }
    }
}

Instance parse_instance(const std::string& text, const ParseOptions& opts) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed instance document: ") + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("instance document must be an object");

    Instance inst;
    inst.n = doc.at("n").get<int>();
    inst.capacity = rational_from_json(doc.at("capacity"), "capacity");
    inst.fleet = doc.at("fleet").get<int>();
    if (inst.capacity <= 0) throw std::runtime_error("nonpositive capacity");

    if (doc.contains("costs")) {
        const json& costs = doc.at("costs");
        inst.cost.assign(inst.n + 1, std::vector<Rational>(inst.n + 1, Rational(0)));
        if (static_cast<int>(costs.size()) != inst.n + 1) {
            throw std::runtime_error("costs must have n+1 rows");
        }
        for (int u = 0; u <= inst.n; ++u) {
            if (static_cast<int>(costs[u].size()) != inst.n + 1) {
                throw std::runtime_error("costs must have n+1 columns");
            }
            for (int v = 0; v <= inst.n; ++v) {
                inst.cost[u][v] = rational_from_json(costs[u][v], "cost");
            }
        }
    } else if (doc.contains("coords")) {
        const json& coords = doc.at("coords");
        if (static_cast<int>(coords.size()) != inst.n + 1) {
            throw std::runtime_error("coords must list depot plus n customers");
        }
        std::vector<std::pair<double, double>> pts;
        for (const auto& c : coords) {
            pts.emplace_back(c[0].get<double>(), c[1].get<double>());
        }
        inst.cost.assign(inst.n + 1, std::vector<Rational>(inst.n + 1, Rational(0)));
        for (int u = 0; u <= inst.n; ++u) {
            for (int v = u + 1; v <= inst.n; ++v) {
                double dx = pts[u].first - pts[v].first;
                double dy = pts[u].second - pts[v].second;
                double dist = std::sqrt(dx * dx + dy * dy);
                Rational c = opts.round_euclidean
                                 ? Rational(static_cast<long long>(std::llround(dist)))
                                 : rational_from_double(dist);
                inst.cost[u][v] = c;
                inst.cost[v][u] = c;
            }
        }
    } else {
        throw std::runtime_error("instance needs either costs or coords");
    }

    const json& sc = doc.at("scenarios");
    const json& probs = sc.at("probs");
    const json& demands = sc.at("demands");
    inst.scenarios.count = static_cast<int>(probs.size());
    if (inst.scenarios.count == 0) throw std::runtime_error("need at least one scenario");
    if (demands.size() != probs.size()) {
        throw std::runtime_error("scenario probs and demands must have equal length");
    }
    Rational prob_sum = 0;
    for (const auto& p : probs) {
        inst.scenarios.probs.push_back(rational_from_json(p, "probability"));
        prob_sum += inst.scenarios.probs.back();
    }
    Rational gap = prob_sum - 1;
    if (gap < 0) gap = -gap;
    if (gap > rational_from_double(kProbSumTol)) {
        std::ostringstream msg;
        msg << "probabilities sum to " << to_double(prob_sum);
        throw std::runtime_error(msg.str());
    }
    if (prob_sum != 1) {
        for (Rational& p : inst.scenarios.probs) p /= prob_sum;
    }
    for (const auto& row : demands) {
        if (static_cast<int>(row.size()) != inst.n) {
            throw std::runtime_error("scenario demand row has wrong length");
        }
        std::vector<Rational> d;
        for (const auto& cell : row) d.push_back(rational_from_json(cell, "demand"));
        inst.scenarios.demands.push_back(std::move(d));
    }
    if (doc.contains("objective_offset")) {
        inst.objective_offset = rational_from_json(doc.at("objective_offset"), "objective_offset");
    }
    inst.finalize();
    return inst;
}

std::string write_instance(const Instance& inst) {
    ordered_json doc;
    doc["n"] = inst.n;
    doc["capacity"] = rational_to_json(inst.capacity);
    doc["fleet"] = inst.fleet;
    ordered_json costs = ordered_json::array();
    for (int u = 0; u <= inst.n; ++u) {
        ordered_json row = ordered_json::array();
        for (int v = 0; v <= inst.n; ++v) row.push_back(rational_to_json(inst.cost[u][v]));
        costs.push_back(std::move(row));
    }
    doc["costs"] = std::move(costs);
    ordered_json sc;
    ordered_json probs = ordered_json::array();
    for (const Rational& p : inst.scenarios.probs) probs.push_back(rational_to_json(p));
    sc["probs"] = std::move(probs);
    ordered_json demands = ordered_json::array();
    for (const auto& row : inst.scenarios.demands) {
        ordered_json r = ordered_json::array();
        for (const Rational& d : row) r.push_back(rational_to_json(d));
        demands.push_back(std::move(r));
    }
    sc["demands"] = std::move(demands);
    doc["scenarios"] = std::move(sc);
    if (inst.objective_offset != 0) {
        doc["objective_offset"] = rational_to_json(inst.objective_offset);
    }
    return doc.dump(2) + "\n";
}

namespace {

// Box-Muller on top of the raw 64-bit stream keeps generation reproducible
// across standard libraries.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double uniform() {
        return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t bits() { return rng_(); }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0;
};

// PSD Cholesky: zero pivots (coincident customers) produce zero columns, so
// perfectly correlated coordinates share one underlying normal draw.
std::vector<std::vector<double>> cholesky_psd(std::vector<std::vector<double>> a) {
    const std::size_t m = a.size();
    std::vector<std::vector<double>> l(m, std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        double diag = a[j][j];
        for (std::size_t s = 0; s < j; ++s) diag -= l[j][s] * l[j][s];
        if (diag <= 1e-12) {
            continue;  // semidefinite direction: leave the column zero
        }
        l[j][j] = std::sqrt(diag);
        for (std::size_t i = j + 1; i < m; ++i) {
            double v = a[i][j];
            for (std::size_t s = 0; s < j; ++s) v -= l[i][s] * l[j][s];
            l[i][j] = v / l[j][j];
        }
    }
    return l;
}

}  // namespace

Instance generate_instance(const GenParams& params) {
    if (params.n < 1 || params.k < 1 || params.n_scenarios < 1 || params.capacity <= 0) {
        throw std::runtime_error("invalid generator parameters");
    }
    Gaussian rng(params.seed);

    Instance inst;
    inst.n = params.n;
    inst.capacity = params.capacity;
    inst.fleet = params.k;

    std::vector<std::pair<double, double>> pts(params.n + 1);
    if (!params.fixed_coords.empty()) {
        if (static_cast<int>(params.fixed_coords.size()) != params.n + 1) {
            throw std::runtime_error("fixed_coords must list depot plus n customers");
        }
        pts = params.fixed_coords;
    } else {
        for (int v = 0; v <= params.n; ++v) {
            pts[v] = {100.0 * rng.uniform(), 100.0 * rng.uniform()};
        }
    }
    inst.cost.assign(params.n + 1, std::vector<Rational>(params.n + 1, Rational(0)));
    for (int u = 0; u <= params.n; ++u) {
        for (int v = u + 1; v <= params.n; ++v) {
            double dx = pts[u].first - pts[v].first;
            double dy = pts[u].second - pts[v].second;
            double dist = std::sqrt(dx * dx + dy * dy);
            Rational c = params.round_costs
                             ? Rational(static_cast<long long>(std::llround(dist)))
                             : rational_from_double(dist);
            inst.cost[u][v] = c;
            inst.cost[v][u] = c;
        }
    }

    // Mean demands keep the expected total near 3/4 of the fleet capacity so
    // that generated instances admit feasible plans for most draws.
    double cap = to_double(params.capacity);
    double mean_budget = 0.75 * cap * params.k / params.n;
    std::vector<double> mu(params.n + 1, 0.0);
    std::vector<double> sigma(params.n + 1, 0.0);
    for (int v = 1; v <= params.n; ++v) {
        mu[v] = std::max(1.0, std::floor(mean_budget * (0.5 + rng.uniform())));
        mu[v] = std::min(mu[v], cap);
        sigma[v] = params.sigma_factor * mu[v];
    }

    std::vector<std::vector<double>> chol;
    if (params.mode == DemandModel::Correlated) {
        double scale = params.correlation_scale;
        if (scale <= 0) {
            double total = 0;
            int pairs = 0;
            for (int u = 1; u <= params.n; ++u) {
                for (int v = u + 1; v <= params.n; ++v) {
                    double dx = pts[u].first - pts[v].first;
                    double dy = pts[u].second - pts[v].second;
                    total += std::sqrt(dx * dx + dy * dy);
                    ++pairs;
                }
            }
            scale = pairs > 0 ? std::max(total / pairs, 1e-9) : 1.0;
        }
        std::vector<std::vector<double>> cov(params.n, std::vector<double>(params.n, 0.0));
        for (int u = 1; u <= params.n; ++u) {
            for (int v = 1; v <= params.n; ++v) {
                double dx = pts[u].first - pts[v].first;
                double dy = pts[u].second - pts[v].second;
                double rho = std::exp(-std::sqrt(dx * dx + dy * dy) / scale);
                cov[u - 1][v - 1] = rho * sigma[u] * sigma[v];
            }
        }
        chol = cholesky_psd(std::move(cov));
    }

    inst.scenarios.count = params.n_scenarios;
    Rational p = Rational(1) / Rational(params.n_scenarios);
    inst.scenarios.probs.assign(params.n_scenarios, p);
    BigInt cap_floor = rat_floor(params.capacity);
    for (int xi = 0; xi < params.n_scenarios; ++xi) {
        std::vector<double> draw(params.n, 0.0);
        if (params.mode == DemandModel::Independent) {
            for (int v = 1; v <= params.n; ++v) {
                draw[v - 1] = mu[v] + sigma[v] * rng.normal();
            }
        } else {
            std::vector<double> z(params.n);
            for (int v = 0; v < params.n; ++v) z[v] = rng.normal();
            for (int v = 1; v <= params.n; ++v) {
                double acc = mu[v];
                for (int s = 0; s < params.n; ++s) acc += chol[v - 1][s] * z[s];
                draw[v - 1] = acc;
            }
        }
        std::vector<Rational> row(params.n);
        for (int v = 0; v < params.n; ++v) {
            double clamped = std::min(std::max(draw[v], 0.0), cap);
            BigInt d = BigInt(static_cast<long long>(std::llround(clamped)));
            if (d > cap_floor) d = cap_floor;
            row[v] = Rational(d);
        }
        inst.scenarios.demands.push_back(std::move(row));
    }

    // A customer whose every scenario rounded to zero would violate the
    // positive-expected-demand invariant; bump one scenario to 1.
    for (int v = 1; v <= params.n; ++v) {
        bool all_zero = true;
        for (int xi = 0; xi < params.n_scenarios && all_zero; ++xi) {
            if (inst.demand(xi, v) > 0) all_zero = false;
        }
        if (all_zero) inst.scenarios.demands[0][v - 1] = 1;
    }

    inst.finalize();
    return inst;
}

Instance preprocess_demands(const Instance& inst) {
    Instance out = inst;
    for (int xi = 0; xi < out.scenarios.count; ++xi) {
        for (int v = 1; v <= out.n; ++v) {
            Rational& d = out.scenarios.demands[xi][v - 1];
            if (d > out.capacity) {
                BigInt q = rat_ceil(d / out.capacity) - 1;
                d -= Rational(q) * out.capacity;
                out.objective_offset +=
                    Rational(q) * 2 * out.cost[0][v] * out.scenarios.probs[xi];
            }
        }
    }
    out.finalize();
    return out;
}

SubtourError::SubtourError(std::vector<int> cycle_vertices)
    : std::runtime_error("integer point contains a depot-free cycle"),
      cycle(std::move(cycle_vertices)) {}

RoutingPlan routing_plan_from_edges(const EdgeVector& x, int n_customers) {
    const int m = num_edges(n_customers);
    if (static_cast<int>(x.size()) != m) throw DegreeError("edge vector has wrong length");

    std::vector<std::vector<int>> adj(n_customers + 1);
    std::vector<int> depot_double;  // customers with x_{0v} = 2
    for (int e = 0; e < m; ++e) {
        const Rational& val = x[e];
        if (val == 0) continue;
        auto [u, v] = edge_ends(e, n_customers);
        if (val == 1) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        } else if (val == 2 && u == 0) {
            depot_double.push_back(v);
        } else {
            throw DegreeError("edge vector is not a valid integer point");
        }
    }

    std::vector<int> degree(n_customers + 1, 0);
    for (int v = 0; v <= n_customers; ++v) degree[v] = static_cast<int>(adj[v].size());
    for (int v : depot_double) {
        degree[0] += 2;
        degree[v] += 2;
    }
    for (int v = 1; v <= n_customers; ++v) {
        if (degree[v] != 2) {
            throw DegreeError("customer " + std::to_string(v) + " has degree " +
                              std::to_string(degree[v]));
        }
    }

    RoutingPlan plan;
    std::vector<bool> used(n_customers + 1, false);
    for (int v : depot_double) {
        plan.routes.push_back({v});
        used[v] = true;
    }
    std::vector<bool> depot_edge_used(adj[0].size(), false);
    for (std::size_t i = 0; i < adj[0].size(); ++i) {
        if (depot_edge_used[i]) continue;
        int prev = 0;
        int cur = adj[0][i];
        depot_edge_used[i] = true;
        Route route;
        while (cur != 0) {
            if (used[cur]) throw DegreeError("vertex revisited while decoding");
            used[cur] = true;
            route.push_back(cur);
            int next = -1;
            for (int w : adj[cur]) {
                if (w != prev) {
                    next = w;
                    break;
                }
            }
            if (next == -1) {
                // Both neighbors equal prev: the two parallel depot edges case
                // is handled by depot_double, so this is a dead end.
                throw DegreeError("dangling path while decoding");
            }
            prev = cur;
            cur = next;
        }
        // Mark the closing depot edge consumed.
        for (std::size_t j = 0; j < adj[0].size(); ++j) {
            if (!depot_edge_used[j] && adj[0][j] == prev) {
                depot_edge_used[j] = true;
                break;
            }
        }
        plan.routes.push_back(canonical_route(route));
    }

    for (int v = 1; v <= n_customers; ++v) {
        if (degree[v] > 0 && !used[v]) {
            std::vector<int> cycle;
            int prev = -1;
            int cur = v;
            while (true) {
                cycle.push_back(cur);
                int next = -1;
                for (int w : adj[cur]) {
                    if (w != prev) {
                        next = w;
                        break;
                    }
                }
                if (next == -1 || next == v) break;
                prev = cur;
                cur = next;
            }
            throw SubtourError(cycle);
        }
    }
    return plan;
}

EdgeVector edges_from_plan(const RoutingPlan& plan, int n_customers) {
    EdgeVector x(num_edges(n_customers), Rational(0));
    for (const Route& r : plan.routes) {
        if (r.empty()) throw DegreeError("empty route in plan");
        if (r.size() == 1) {
            x[edge_index(0, r[0], n_customers)] = 2;
            continue;
        }
        x[edge_index(0, r.front(), n_customers)] += 1;
        x[edge_index(0, r.back(), n_customers)] += 1;
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            x[edge_index(r[i], r[i + 1], n_customers)] += 1;
        }
    }
    return x;
}

BigInt rci_rhs(std::span<const int> customers, const Instance& inst) {
    if (customers.empty()) throw std::invalid_argument("rci_rhs: empty customer set");
    return rat_ceil(inst.expected_demand_sum(customers) / inst.capacity);
}

bool plan_is_feasible(const RoutingPlan& plan, const Instance& inst) {
    if (static_cast<int>(plan.routes.size()) != inst.fleet) return false;
    std::vector<bool> seen(inst.n + 1, false);
    int covered = 0;
    for (const Route& r : plan.routes) {
        if (r.empty()) return false;
        Rational load = 0;
        for (int v : r) {
            if (v < 1 || v > inst.n || seen[v]) return false;
            seen[v] = true;
            ++covered;
            load += inst.expected_demand[v];
        }
        if (load > inst.capacity) return false;
    }
    return covered == inst.n;
}

}  // namespace vrpsd
