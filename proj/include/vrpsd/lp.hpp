#pragma once

#include <memory>
#include <string>
#include <vector>

namespace vrpsd {

enum class RowSense { LE, GE, EQ };

struct LpRow {
    std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
    RowSense sense = RowSense::LE;
    double rhs = 0;
};

struct LpModel {
    std::vector<double> lo, hi, obj;
    std::vector<LpRow> rows;

    int add_var(double lower, double upper, double objective);
    void add_row(LpRow row);
    int num_vars() const { return static_cast<int>(lo.size()); }
};

enum class LpStatus { Optimal, Infeasible };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double obj = 0;
    long iterations = 0;
    bool used_exact_fallback = false;
};

// Bounded-variable primal simplex (dense tableau, two phases). Deterministic:
// Dantzig pricing with index tie-breaks, Bland's rule after a degeneracy
// streak, and an exact-rational re-solve if the double run misbehaves.
class LpSolver {
public:
    explicit LpSolver(LpModel model);
    ~LpSolver();
    LpSolver(const LpSolver&) = delete;
    LpSolver& operator=(const LpSolver&) = delete;

    LpResult solve();

    // Rows only; the retained basis (old basics + new slacks) warm-starts the
    // next solve. Throws on bad variable indices.
    void add_rows(const std::vector<LpRow>& rows);

    void set_var_bounds(int var, double lower, double upper);

    const LpModel& model() const { return model_; }

    // CPLEX LP text format, for debugging dumps.
    std::string write_lp_format() const;

private:
    struct Impl;

    LpModel model_;
    std::unique_ptr<Impl> impl_;
    // Saved basis: for each row the basic column (struct var j, or n+row for
    // that row's slack); empty when no basis is available.
    std::vector<int> saved_basis_;
    std::vector<signed char> saved_nb_at_upper_;  // per structural var
};

LpResult solve(const LpModel& model);

}  // namespace vrpsd
