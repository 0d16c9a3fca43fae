#include "doctest.h"

#include "vrpsd/lp.hpp"
#include "vrpsd/rational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

using namespace vrpsd;

namespace {

// Exact vertex enumeration for tiny LPs: every basic solution fixes
// (num_vars - num_eq_rows) variables at a bound and solves the rest.
struct VertexOracle {
    const LpModel& model;

    bool solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b,
                      std::vector<Rational>& out) const {
        const std::size_t n = b.size();
        std::vector<int> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t pivot = col;
            while (pivot < n && a[pivot][col] == 0) ++pivot;
            if (pivot == n) return false;
            std::swap(a[col], a[pivot]);
            std::swap(b[col], b[pivot]);
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col || a[r][col] == 0) continue;
                Rational f = a[r][col] / a[col][col];
                for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
                b[r] -= f * b[col];
            }
        }
        out.assign(n, Rational(0));
        for (std::size_t i = 0; i < n; ++i) out[i] = b[i] / a[i][i];
        return true;
    }

    // Minimum objective over all vertices (assumes pure equality rows).
    bool best(double& value) const {
        const int n = model.num_vars();
        const int m = static_cast<int>(model.rows.size());
        const int free_vars = n - m;
        REQUIRE(free_vars >= 0);
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        bool found = false;
        Rational best_val;
        // Choose which variables are nonbasic (at a bound).
        std::vector<int> choice(free_vars);
        std::function<void(int, int)> rec = [&](int start, int pos) {
            if (pos == free_vars) {
                // Each nonbasic at lo or hi.
                for (int mask = 0; mask < (1 << free_vars); ++mask) {
                    std::vector<Rational> fixed(n, Rational(0));
                    std::vector<bool> is_fixed(n, false);
                    bool ok = true;
                    for (int i = 0; i < free_vars && ok; ++i) {
                        double bound = (mask >> i) & 1 ? model.hi[choice[i]] : model.lo[choice[i]];
                        if (!std::isfinite(bound)) ok = false;
                        fixed[choice[i]] = rational_from_double(bound);
                        is_fixed[choice[i]] = true;
                    }
                    if (!ok) continue;
                    std::vector<int> basics;
                    for (int i = 0; i < n; ++i) {
                        if (!is_fixed[i]) basics.push_back(i);
                    }
                    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m, Rational(0)));
                    std::vector<Rational> b(m, Rational(0));
                    for (int r = 0; r < m; ++r) {
                        b[r] = rational_from_double(model.rows[r].rhs);
                        for (const auto& [j, c] : model.rows[r].coeffs) {
                            Rational rc = rational_from_double(c);
                            auto it = std::find(basics.begin(), basics.end(), j);
                            if (it != basics.end()) {
                                a[r][it - basics.begin()] += rc;
                            } else {
                                b[r] -= rc * fixed[j];
                            }
                        }
                    }
                    std::vector<Rational> solved;
                    if (!solve_square(a, b, solved)) continue;
                    std::vector<Rational> x(n);
                    for (int i = 0; i < n; ++i) x[i] = fixed[i];
                    bool feas = true;
                    for (std::size_t i = 0; i < basics.size(); ++i) {
                        x[basics[i]] = solved[i];
                    }
                    for (int i = 0; i < n && feas; ++i) {
                        if (std::isfinite(model.lo[i]) && x[i] < rational_from_double(model.lo[i]))
                            feas = false;
                        if (std::isfinite(model.hi[i]) && x[i] > rational_from_double(model.hi[i]))
                            feas = false;
                    }
                    if (!feas) continue;
                    Rational val = 0;
                    for (int i = 0; i < n; ++i) val += rational_from_double(model.obj[i]) * x[i];
                    if (!found || val < best_val) {
                        found = true;
                        best_val = val;
                    }
                }
                return;
            }
            for (int i = start; i < n; ++i) {
                choice[pos] = i;
                rec(i + 1, pos + 1);
            }
        };
        rec(0, 0);
        if (found) value = to_double(best_val);
        return found;
    }
};

}  // namespace

TEST_CASE("no rows means all variables at their cheap bound") {
    LpModel model;
    model.add_var(0, 5, 2.0);
    model.add_var(1, 4, 3.0);
    model.add_var(0, 2, -1.0);  // negative cost drives to the upper bound
    LpResult res = solve(model);
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.x[0] == doctest::Approx(0));
    CHECK(res.x[1] == doctest::Approx(1));
    CHECK(res.x[2] == doctest::Approx(2));
    CHECK(res.obj == doctest::Approx(1.0));
}

TEST_CASE("contradictory rows are infeasible") {
    LpModel model;
    model.add_var(0, 1, 1.0);
    LpRow ge;
    ge.sense = RowSense::GE;
    ge.rhs = 1;
    ge.coeffs = {{0, 1.0}};
    model.add_row(ge);
    LpRow le;
    le.sense = RowSense::LE;
    le.rhs = 0;
    le.coeffs = {{0, 1.0}};
    model.add_row(le);
    CHECK(solve(model).status == LpStatus::Infeasible);
}

TEST_CASE("degree-only relaxation matches vertex enumeration") {
    // n = 3 customers, k = 1: vars are the six edges of K4, degree rows only.
    // Costs chosen asymmetric enough to have a unique optimum.
    const int n = 3;
    auto edge = [&](int u, int v) {
        if (u > v) std::swap(u, v);
        int id = 0;
        for (int a = 0; a <= n; ++a) {
            for (int b = a + 1; b <= n; ++b) {
                if (a == u && b == v) return id;
                ++id;
            }
        }
        return -1;
    };
    double costs[4][4] = {};
    int c = 1;
    for (int u = 0; u <= n; ++u) {
        for (int v = u + 1; v <= n; ++v) {
            costs[u][v] = c;
            c += 2;
        }
    }
    LpModel model;
    for (int u = 0; u <= n; ++u) {
        for (int v = u + 1; v <= n; ++v) {
            model.add_var(0, u == 0 ? 2 : 1, costs[u][v]);
        }
    }
    for (int v = 1; v <= n; ++v) {
        LpRow row;
        row.sense = RowSense::EQ;
        row.rhs = 2;
        for (int u = 0; u <= n; ++u) {
            if (u != v) row.coeffs.push_back({edge(u, v), 1.0});
        }
        model.add_row(row);
    }
    LpRow depot;
    depot.sense = RowSense::EQ;
    depot.rhs = 2;
    for (int v = 1; v <= n; ++v) depot.coeffs.push_back({edge(0, v), 1.0});
    model.add_row(depot);

    LpResult res = solve(model);
    REQUIRE(res.status == LpStatus::Optimal);
    double expect = 0;
    VertexOracle oracle{model};
    REQUIRE(oracle.best(expect));
    CHECK(res.obj == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("adding rows warm-starts correctly") {
    LpModel model;
    model.add_var(0, 2, 1.0);
    model.add_var(0, 2, 1.0);
    LpRow row;
    row.sense = RowSense::GE;
    row.rhs = 2;
    row.coeffs = {{0, 1.0}, {1, 1.0}};
    model.add_row(row);

    LpSolver solver(model);
    LpResult first = solver.solve();
    REQUIRE(first.status == LpStatus::Optimal);
    CHECK(first.obj == doctest::Approx(2.0));

    SUBCASE("non-binding row keeps the objective") {
        LpRow weak;
        weak.sense = RowSense::LE;
        weak.rhs = 10;
        weak.coeffs = {{0, 1.0}, {1, 1.0}};
        solver.add_rows({weak});
        CHECK(solver.solve().obj == doctest::Approx(2.0));
    }
    SUBCASE("violated cut raises the objective") {
        LpRow cut;
        cut.sense = RowSense::GE;
        cut.rhs = 3;
        cut.coeffs = {{0, 1.0}};
        solver.add_rows({cut});
        LpResult after = solver.solve();
        REQUIRE(after.status == LpStatus::Infeasible);  // x0 <= 2 < 3
    }
    SUBCASE("feasible violated cut") {
        LpRow cut;
        cut.sense = RowSense::GE;
        cut.rhs = 1.5;
        cut.coeffs = {{0, 1.0}};
        solver.add_rows({cut});
        LpResult after = solver.solve();
        REQUIRE(after.status == LpStatus::Optimal);
        CHECK(after.obj >= first.obj - 1e-9);
        CHECK(after.x[0] >= 1.5 - 1e-9);  // alternate optima along the cut
    }
}

TEST_CASE("warm and cold solves agree on random models") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + static_cast<int>(rng() % 5);
        LpModel model;
        for (int j = 0; j < n; ++j) {
            double lo = 0;
            double hi = 1 + static_cast<double>(rng() % 4);
            double obj = static_cast<double>(rng() % 11) - 5.0;
            model.add_var(lo, hi, obj);
        }
        int rows = 1 + static_cast<int>(rng() % 3);
        for (int r = 0; r < rows; ++r) {
            LpRow row;
            int kind = static_cast<int>(rng() % 3);
            row.sense = kind == 0 ? RowSense::LE : kind == 1 ? RowSense::GE : RowSense::EQ;
            double total = 0;
            for (int j = 0; j < n; ++j) {
                if (rng() % 2) {
                    double c = static_cast<double>(rng() % 7) - 3.0;
                    row.coeffs.push_back({j, c});
                    total += c * (model.hi[j] / 2);
                }
            }
            if (row.coeffs.empty()) row.coeffs.push_back({0, 1.0});
            row.rhs = total;
            model.add_row(row);
        }
        // Extra rows appended after a first solve: warm path.
        int extra = 1 + static_cast<int>(rng() % 2);
        std::vector<LpRow> extra_rows;
        for (int r = 0; r < extra; ++r) {
            LpRow row;
            row.sense = rng() % 2 ? RowSense::LE : RowSense::GE;
            double total = 0;
            for (int j = 0; j < n; ++j) {
                if (rng() % 2) {
                    double c = static_cast<double>(rng() % 5) - 2.0;
                    row.coeffs.push_back({j, c});
                    total += c * (model.hi[j] / 3);
                }
            }
            if (row.coeffs.empty()) row.coeffs.push_back({0, 1.0});
            row.rhs = total;
            extra_rows.push_back(row);
        }

        LpSolver warm(model);
        warm.solve();
        warm.add_rows(extra_rows);
        LpResult warm_res = warm.solve();

        LpModel cold_model = model;
        for (const LpRow& row : extra_rows) cold_model.add_row(row);
        LpResult cold_res = solve(cold_model);

        REQUIRE(warm_res.status == cold_res.status);
        if (warm_res.status == LpStatus::Optimal) {
            CHECK(warm_res.obj == doctest::Approx(cold_res.obj).epsilon(1e-8));
        }
    }
}

TEST_CASE("bound tightening never lowers the objective") {
    LpModel model;
    model.add_var(0, 2, 1.0);
    model.add_var(0, 2, 2.0);
    LpRow row;
    row.sense = RowSense::GE;
    row.rhs = 2;
    row.coeffs = {{0, 1.0}, {1, 1.0}};
    model.add_row(row);
    LpSolver solver(model);
    double base = solver.solve().obj;
    solver.set_var_bounds(0, 0, 0.5);  // branching-style restriction
    LpResult res = solver.solve();
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.obj >= base - 1e-9);
}

TEST_CASE("lp text dump mentions every row") {
    LpModel model;
    model.add_var(0, 1, 1.0);
    LpRow row;
    row.sense = RowSense::LE;
    row.rhs = 1;
    row.coeffs = {{0, 1.0}};
    model.add_row(row);
    LpSolver solver(model);
    std::string text = solver.write_lp_format();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("c0:") != std::string::npos);
    CHECK(text.find("Bounds") != std::string::npos);
}
