#include "vrpsd/lp.hpp"

#include "vrpsd/rational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace vrpsd {

int LpModel::add_var(double lower, double upper, double objective) {
    if (lower > upper) throw std::invalid_argument("variable bounds crossed");
    lo.push_back(lower);
    hi.push_back(upper);
    obj.push_back(objective);
    return static_cast<int>(lo.size()) - 1;
}

void LpModel::add_row(LpRow row) {
    for (const auto& [j, c] : row.coeffs) {
        if (j < 0 || j >= num_vars()) throw std::out_of_range("row references unknown variable");
        (void)c;
    }
    rows.push_back(std::move(row));
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr long kDegenerateStreakLimit = 60;
constexpr long kPivotRebuildBudget = 300;

template <typename Real>
struct Traits;

template <>
struct Traits<double> {
    static double from_double(double v) { return v; }
    static double to_dbl(double v) { return v; }
    static bool is_zero(double v) { return std::fabs(v) <= kPivotTol; }
    static bool is_neg(double v) { return v < -kPivotTol; }
    static bool is_pos(double v) { return v > kPivotTol; }
};

template <>
struct Traits<Rational> {
    static Rational from_double(double v) { return rational_from_double(v); }
    static double to_dbl(const Rational& v) { return to_double(v); }
    static bool is_zero(const Rational& v) { return v == 0; }
    static bool is_neg(const Rational& v) { return v < 0; }
    static bool is_pos(const Rational& v) { return v > 0; }
};

enum NbState : signed char { kBasic = 0, kAtLower = 1, kAtUpper = 2 };
enum class ColKind : signed char { Structural, Slack, Artificial };

// Bounded-variable primal simplex over a dense tableau. The tableau persists
// across solves: rows can be appended (reduced against the current basis) and
// bounds updated in place, so re-solves skip the full refactorization.
template <typename Real>
class Tableau {
public:
    using T = Traits<Real>;

    Tableau(const LpModel& model, const std::vector<int>* warm_basis,
            const std::vector<signed char>* warm_nb_at_upper) {
        m_ = static_cast<int>(model.rows.size());
        n_ = model.num_vars();
        ncols_ = n_ + m_;
        rows_.assign(m_, std::vector<Real>(ncols_, Real(0)));
        rhs_.assign(m_, Real(0));
        lo_.assign(ncols_, Real(0));
        hi_.assign(ncols_, Real(0));
        has_lo_.assign(ncols_, true);
        has_hi_.assign(ncols_, true);
        kind_.assign(ncols_, ColKind::Structural);
        owner_row_.assign(ncols_, -1);
        slack_col_.assign(m_, -1);

        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(model.lo[j])) lo_[j] = T::from_double(model.lo[j]);
            else has_lo_[j] = false;
            if (std::isfinite(model.hi[j])) hi_[j] = T::from_double(model.hi[j]);
            else has_hi_[j] = false;
        }
        for (int i = 0; i < m_; ++i) {
            const LpRow& row = model.rows[i];
            for (const auto& [j, c] : row.coeffs) rows_[i][j] += T::from_double(c);
            int s = n_ + i;
            rows_[i][s] = Real(1);
            rhs_[i] = T::from_double(row.rhs);
            kind_[s] = ColKind::Slack;
            owner_row_[s] = i;
            slack_col_[i] = s;
            switch (row.sense) {
                case RowSense::LE: has_hi_[s] = false; break;  // s in [0, inf)
                case RowSense::GE: has_lo_[s] = false; break;  // s in (-inf, 0]
                case RowSense::EQ: break;                      // s fixed at 0
            }
        }

        frozen_.assign(ncols_, false);
        default_states();
        basis_.assign(m_, -1);
        bool warm_ok = warm_basis && static_cast<int>(warm_basis->size()) == m_;
        if (warm_ok) {
            std::vector<bool> used(ncols_, false);
            for (int col : *warm_basis) {
                if (col < 0 || col >= ncols_ || used[col]) {
                    warm_ok = false;
                    break;
                }
                used[col] = true;
            }
        }
        if (warm_ok) {
            basis_ = *warm_basis;
            if (warm_nb_at_upper && static_cast<int>(warm_nb_at_upper->size()) == n_) {
                for (int j = 0; j < n_; ++j) {
                    if ((*warm_nb_at_upper)[j] && has_hi_[j]) state_[j] = kAtUpper;
                }
            }
            for (int col : basis_) state_[col] = kBasic;
            if (!refactorize()) {
                default_states();
                slack_basis();
            }
        } else {
            slack_basis();
        }

        obj_.assign(ncols_, Real(0));
        for (int j = 0; j < n_; ++j) obj_[j] = T::from_double(model.obj[j]);
    }

    bool run(long* iterations) {
        if (!phase1(iterations)) return false;
        std::vector<Real> cost(ncols_, Real(0));
        for (int j = 0; j < n_; ++j) cost[j] = obj_[j];
        optimize(cost, iterations);
        cull_artificials();
        return true;
    }

    double infeasibility() const { return residual_; }
    long pivots() const { return pivot_count_; }

    std::vector<double> structural_values() const {
        std::vector<Real> vals(ncols_, Real(0));
        for (int j = 0; j < ncols_; ++j) {
            if (state_[j] != kBasic) vals[j] = bound_value(j);
        }
        for (int i = 0; i < m_; ++i) vals[basis_[i]] = xb_[i];
        std::vector<double> x(n_);
        for (int j = 0; j < n_; ++j) x[j] = T::to_dbl(vals[j]);
        return x;
    }

    // Logical ids: structural j stays j; a slack or artificial basic in row i
    // reports as n + i, which a fresh construction reads as that row's slack.
    std::vector<int> logical_basis() const {
        std::vector<int> out(m_);
        for (int i = 0; i < m_; ++i) {
            int col = basis_[i];
            out[i] = kind_[col] == ColKind::Structural ? col : n_ + owner_row_[col];
        }
        return out;
    }

    std::vector<signed char> nb_at_upper() const {
        std::vector<signed char> out(n_, 0);
        for (int j = 0; j < n_; ++j) out[j] = state_[j] == kAtUpper ? 1 : 0;
        return out;
    }

    void set_var_bounds(int var, double lower, double upper) {
        if (std::isfinite(lower)) {
            lo_[var] = T::from_double(lower);
            has_lo_[var] = true;
        } else {
            has_lo_[var] = false;
        }
        if (std::isfinite(upper)) {
            hi_[var] = T::from_double(upper);
            has_hi_[var] = true;
        } else {
            has_hi_[var] = false;
        }
        if (state_[var] == kAtLower && !has_lo_[var]) state_[var] = kAtUpper;
        if (state_[var] == kAtUpper && !has_hi_[var]) state_[var] = kAtLower;
    }

    // Appends rows already reduced against the current basis; their slacks
    // enter the basis, so the identity structure is preserved.
    void append_rows(const std::vector<LpRow>& new_rows) {
        for (const LpRow& row : new_rows) {
            std::vector<Real> dense(ncols_ + 1, Real(0));
            for (const auto& [j, c] : row.coeffs) dense[j] += T::from_double(c);
            Real rhs = T::from_double(row.rhs);

            int s = ncols_;
            for (int i = 0; i < m_; ++i) rows_[i].push_back(Real(0));
            dense[s] = Real(1);
            lo_.push_back(Real(0));
            hi_.push_back(Real(0));
            has_lo_.push_back(true);
            has_hi_.push_back(true);
            kind_.push_back(ColKind::Slack);
            owner_row_.push_back(m_);
            state_.push_back(kBasic);
            obj_.push_back(Real(0));
            frozen_.push_back(false);
            switch (row.sense) {
                case RowSense::LE: has_hi_.back() = false; break;
                case RowSense::GE: has_lo_.back() = false; break;
                case RowSense::EQ: break;
            }
            ++ncols_;

            // Zero out the basis columns of the new row.
            for (int i = 0; i < m_; ++i) {
                Real f = dense[basis_[i]];
                if (T::is_zero(f)) continue;
                const std::vector<Real>& br = rows_[i];
                for (int j = 0; j < ncols_; ++j) {
                    if (!T::is_zero(br[j])) dense[j] -= f * br[j];
                }
                dense[basis_[i]] = Real(0);  // exact by construction
                rhs -= f * rhs_[i];
            }
            dense.resize(ncols_);
            rows_.push_back(std::move(dense));
            rhs_.push_back(rhs);
            basis_.push_back(s);
            slack_col_.push_back(s);
            ++m_;
        }
        refresh_values();
    }

    // Recomputes the basic values from the current bounds and states.
    void refresh_values() {
        xb_ = rhs_;
        for (int j = 0; j < ncols_; ++j) {
            if (state_[j] == kBasic) continue;
            Real v = bound_value(j);
            if (v == Real(0)) continue;
            for (int i = 0; i < m_; ++i) {
                if (!T::is_zero(rows_[i][j])) xb_[i] -= rows_[i][j] * v;
            }
        }
    }

private:
    void default_states() {
        state_.assign(ncols_, kAtLower);
        for (int j = 0; j < ncols_; ++j) {
            if (!has_lo_[j]) state_[j] = kAtUpper;
        }
    }

    void slack_basis() {
        for (int i = 0; i < m_; ++i) {
            basis_[i] = slack_col_[i];
            state_[slack_col_[i]] = kBasic;
        }
        refactorize();
    }

    Real bound_value(int j) const {
        if (state_[j] == kAtLower) return has_lo_[j] ? lo_[j] : Real(0);
        return has_hi_[j] ? hi_[j] : Real(0);
    }

    // Gauss-Jordan turning the basis columns into an identity.
    bool refactorize() {
        for (int i = 0; i < m_; ++i) {
            int col = basis_[i];
            int pr = -1;
            for (int r = i; r < m_; ++r) {
                if (!T::is_zero(rows_[r][col])) {
                    pr = r;
                    break;
                }
            }
            if (pr == -1) return false;
            if (pr != i) {
                std::swap(rows_[i], rows_[pr]);
                std::swap(rhs_[i], rhs_[pr]);
            }
            Real piv = rows_[i][col];
            for (int j = 0; j < ncols_; ++j) rows_[i][j] /= piv;
            rhs_[i] /= piv;
            for (int r = 0; r < m_; ++r) {
                if (r == i) continue;
                Real f = rows_[r][col];
                if (T::is_zero(f)) continue;
                for (int j = 0; j < ncols_; ++j) rows_[r][j] -= f * rows_[i][j];
                rhs_[r] -= f * rhs_[i];
            }
        }
        refresh_values();
        return true;
    }

    bool phase1(long* iterations) {
        residual_ = 0;
        int artificial_count = 0;
        for (int i = 0; i < m_; ++i) {
            int b = basis_[i];
            Real v = xb_[i];
            bool below = has_lo_[b] && v < lo_[b];
            bool above = has_hi_[b] && v > hi_[b];
            if (!below && !above) continue;
            Real target = below ? lo_[b] : hi_[b];
            Real gap = v - target;
            // The basic column is e_i, so clamping the variable to its bound
            // and letting a fresh artificial absorb the residual leaves every
            // other basic value unchanged. Negate the row first when the
            // residual is negative so the artificial's column stays +e_i.
            if (T::is_neg(gap)) {
                for (int j = 0; j < ncols_; ++j) rows_[i][j] = -rows_[i][j];
                rhs_[i] = -rhs_[i];
            }
            int a = add_artificial_column(i);
            ++artificial_count;
            state_[b] = below ? kAtLower : kAtUpper;
            basis_[i] = a;
            state_[a] = kBasic;
            xb_[i] = T::is_neg(gap) ? Real(-gap) : gap;
        }
        if (artificial_count == 0) return true;

        std::vector<Real> cost(ncols_, Real(0));
        for (int j = 0; j < ncols_; ++j) {
            if (kind_[j] == ColKind::Artificial && !frozen_[j]) cost[j] = Real(1);
        }
        optimize(cost, iterations);

        Real total(0);
        for (int i = 0; i < m_; ++i) {
            if (kind_[basis_[i]] == ColKind::Artificial && !frozen_[basis_[i]]) {
                total += xb_[i];
            }
        }
        residual_ = T::to_dbl(total);
        bool feasible;
        if constexpr (std::is_same_v<Real, double>) feasible = total <= kFeasTol;
        else feasible = total == 0;
        if (!feasible) return false;

        // Drive leftover artificials out of the basis where possible; freeze
        // any redundant-row artificial at zero.
        for (int i = 0; i < m_; ++i) {
            int b = basis_[i];
            if (kind_[b] != ColKind::Artificial || frozen_[b]) continue;
            int enter = -1;
            for (int j = 0; j < ncols_; ++j) {
                if (kind_[j] != ColKind::Artificial && state_[j] != kBasic &&
                    !T::is_zero(rows_[i][j])) {
                    enter = j;
                    break;
                }
            }
            if (enter != -1) {
                basis_[i] = enter;
                xb_[i] = bound_value(enter);
                state_[enter] = kBasic;
                state_[b] = kAtLower;
                pivot_rows(i, enter);
            }
        }
        for (int j = 0; j < ncols_; ++j) {
            if (kind_[j] != ColKind::Artificial) continue;
            lo_[j] = Real(0);
            hi_[j] = Real(0);
            has_lo_[j] = has_hi_[j] = true;
            frozen_[j] = true;
            if (state_[j] != kBasic) state_[j] = kAtLower;
        }
        return true;
    }

    // Strict ordering for ratio-test values; doubles get a small slack so the
    // pivot-magnitude preference can act on near-ties.
    static bool ratio_lt(const Real& a, const Real& b) {
        if constexpr (std::is_same_v<Real, double>) return a < b - 1e-9;
        else return a < b;
    }

    int add_artificial_column(int row) {
        int a = ncols_++;
        for (int i = 0; i < m_; ++i) rows_[i].push_back(Real(0));
        rows_[row][a] = Real(1);
        lo_.push_back(Real(0));
        hi_.push_back(Real(0));
        has_lo_.push_back(true);
        has_hi_.push_back(false);
        state_.push_back(kAtLower);
        obj_.push_back(Real(0));
        kind_.push_back(ColKind::Artificial);
        owner_row_.push_back(row);
        frozen_.resize(ncols_, false);
        frozen_[a] = false;
        return a;
    }

    // Physically removes nonbasic artificial columns so they cannot pile up
    // across re-solves; basic ones (redundant rows) survive frozen at zero.
    void cull_artificials() {
        std::vector<int> keep;
        keep.reserve(ncols_);
        std::vector<int> new_index(ncols_, -1);
        for (int j = 0; j < ncols_; ++j) {
            if (kind_[j] == ColKind::Artificial && state_[j] != kBasic) continue;
            new_index[j] = static_cast<int>(keep.size());
            keep.push_back(j);
        }
        if (static_cast<int>(keep.size()) == ncols_) return;
        for (int i = 0; i < m_; ++i) {
            std::vector<Real> row(keep.size());
            for (std::size_t t = 0; t < keep.size(); ++t) row[t] = rows_[i][keep[t]];
            rows_[i] = std::move(row);
        }
        auto remap = [&](auto& v) {
            auto out = v;
            out.resize(keep.size());
            for (std::size_t t = 0; t < keep.size(); ++t) out[t] = v[keep[t]];
            v = std::move(out);
        };
        remap(lo_);
        remap(hi_);
        remap(obj_);
        {
            std::vector<bool> tmp(keep.size());
            for (std::size_t t = 0; t < keep.size(); ++t) tmp[t] = has_lo_[keep[t]];
            has_lo_ = tmp;
            for (std::size_t t = 0; t < keep.size(); ++t) tmp[t] = has_hi_[keep[t]];
            has_hi_ = tmp;
            for (std::size_t t = 0; t < keep.size(); ++t) tmp[t] = frozen_[keep[t]];
            frozen_ = tmp;
        }
        {
            std::vector<signed char> tmp(keep.size());
            for (std::size_t t = 0; t < keep.size(); ++t) tmp[t] = state_[keep[t]];
            state_ = std::move(tmp);
        }
        {
            std::vector<ColKind> tmp(keep.size());
            for (std::size_t t = 0; t < keep.size(); ++t) tmp[t] = kind_[keep[t]];
            kind_ = std::move(tmp);
        }
        {
            std::vector<int> tmp(keep.size());
            for (std::size_t t = 0; t < keep.size(); ++t) tmp[t] = owner_row_[keep[t]];
            owner_row_ = std::move(tmp);
        }
        for (int& col : basis_) col = new_index[col];
        for (int& col : slack_col_) col = new_index[col];
        ncols_ = static_cast<int>(keep.size());
    }

    void optimize(const std::vector<Real>& cost, long* iterations) {
        long degenerate_streak = 0;
        const long iteration_cap = 5000 + 200L * (m_ + ncols_);
        for (long iter = 0;; ++iter) {
            if (iter > iteration_cap) throw std::runtime_error("simplex iteration cap exceeded");
            if (iterations) ++(*iterations);
            const bool bland = degenerate_streak > kDegenerateStreakLimit;

            std::vector<Real> cb(m_, Real(0));
            bool any_cb = false;
            for (int i = 0; i < m_; ++i) {
                cb[i] = cost[basis_[i]];
                if (!T::is_zero(cb[i])) any_cb = true;
            }
            int enter = -1;
            int enter_dir = 0;
            Real best_score(0);
            for (int j = 0; j < ncols_; ++j) {
                if (state_[j] == kBasic) continue;
                if (has_lo_[j] && has_hi_[j] && lo_[j] == hi_[j]) continue;
                Real d = cost[j];
                if (any_cb) {
                    for (int i = 0; i < m_; ++i) {
                        if (!T::is_zero(cb[i]) && !T::is_zero(rows_[i][j])) {
                            d -= cb[i] * rows_[i][j];
                        }
                    }
                }
                int dir = 0;
                if (state_[j] == kAtLower && T::is_neg(d)) dir = 1;
                else if (state_[j] == kAtUpper && T::is_pos(d)) dir = -1;
                if (dir == 0) continue;
                if (bland) {
                    enter = j;
                    enter_dir = dir;
                    break;
                }
                Real score = T::is_neg(d) ? Real(-d) : d;
                if (enter == -1 || score > best_score) {
                    enter = j;
                    enter_dir = dir;
                    best_score = score;
                }
            }
            if (enter == -1) return;

            // Ratio test: the entering variable moves t >= 0 away from its
            // bound; each basic moves by -dir*t*column. Near-ties prefer the
            // larger pivot magnitude to keep the basis well conditioned.
            bool have_row = false;
            Real best_t(0);
            Real best_mag(0);
            int leave_row = -1;
            int leave_to_upper = 0;
            for (int i = 0; i < m_; ++i) {
                const Real& a = rows_[i][enter];
                if (T::is_zero(a)) continue;
                int b = basis_[i];
                bool decreasing = (enter_dir > 0) == T::is_pos(a);
                Real mag = T::is_neg(a) ? Real(-a) : a;
                Real t(0);
                int to_upper;
                if (decreasing) {
                    if (!has_lo_[b]) continue;
                    t = (xb_[i] - lo_[b]) / mag;
                    to_upper = 0;
                } else {
                    if (!has_hi_[b]) continue;
                    t = (hi_[b] - xb_[i]) / mag;
                    to_upper = 1;
                }
                if (T::is_neg(t)) t = Real(0);
                bool take = false;
                if (!have_row) {
                    take = true;
                } else if (ratio_lt(t, best_t)) {
                    take = true;
                } else if (!ratio_lt(best_t, t)) {
                    // near-tie: larger pivot first, then the index rule
                    if (mag > best_mag) take = true;
                    else if (mag == best_mag && basis_[i] < basis_[leave_row]) take = true;
                }
                if (take) {
                    have_row = true;
                    best_t = t;
                    best_mag = mag;
                    leave_row = i;
                    leave_to_upper = to_upper;
                }
            }
            bool have_flip = has_lo_[enter] && has_hi_[enter];
            Real flip_t = have_flip ? Real(hi_[enter] - lo_[enter]) : Real(0);
            if (!have_row && !have_flip) {
                throw std::runtime_error("LP unbounded; model bounds should prevent this");
            }
            bool use_row = have_row && (!have_flip || !(flip_t < best_t));
            Real t = use_row ? best_t : flip_t;
            if (T::is_zero(t)) ++degenerate_streak;
            else degenerate_streak = 0;

            Real start = bound_value(enter);
            Real step = enter_dir > 0 ? t : Real(-t);
            for (int i = 0; i < m_; ++i) {
                if (!T::is_zero(rows_[i][enter])) xb_[i] -= step * rows_[i][enter];
            }
            if (!use_row) {
                state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
                continue;
            }
            int leaving = basis_[leave_row];
            state_[leaving] = leave_to_upper ? kAtUpper : kAtLower;
            basis_[leave_row] = enter;
            state_[enter] = kBasic;
            xb_[leave_row] = start + step;
            pivot_rows(leave_row, enter);
        }
    }

    void pivot_rows(int row, int col) {
        ++pivot_count_;
        Real piv = rows_[row][col];
        if (T::is_zero(piv)) throw std::runtime_error("zero pivot");
        std::vector<Real>& prow = rows_[row];
        for (int j = 0; j < ncols_; ++j) prow[j] /= piv;
        prow[col] = Real(1);
        rhs_[row] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            Real f = rows_[i][col];
            if (T::is_zero(f)) continue;
            std::vector<Real>& r = rows_[i];
            for (int j = 0; j < ncols_; ++j) {
                if (!T::is_zero(prow[j])) r[j] -= f * prow[j];
            }
            r[col] = Real(0);
            rhs_[i] -= f * rhs_[row];
        }
    }

    int m_ = 0, n_ = 0, ncols_ = 0;
    long pivot_count_ = 0;
    double residual_ = 0;
    std::vector<std::vector<Real>> rows_;
    std::vector<Real> rhs_, xb_, lo_, hi_, obj_;
    std::vector<bool> has_lo_, has_hi_, frozen_;
    std::vector<signed char> state_;
    std::vector<int> basis_;
    std::vector<ColKind> kind_;
    std::vector<int> owner_row_;
    std::vector<int> slack_col_;
};

double row_activity(const LpRow& row, const std::vector<double>& x) {
    double v = 0;
    for (const auto& [j, c] : row.coeffs) v += c * x[j];
    return v;
}

bool solution_feasible(const LpModel& model, const std::vector<double>& x,
                       std::string* why = nullptr) {
    for (int j = 0; j < model.num_vars(); ++j) {
        if (x[j] < model.lo[j] - kFeasTol || x[j] > model.hi[j] + kFeasTol) {
            if (why) {
                *why = "bound x" + std::to_string(j) + "=" + std::to_string(x[j]) + " in [" +
                       std::to_string(model.lo[j]) + "," + std::to_string(model.hi[j]) + "]";
            }
            return false;
        }
    }
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        const LpRow& row = model.rows[i];
        double v = row_activity(row, x);
        double viol = 0;
        if (row.sense == RowSense::LE) viol = v - row.rhs;
        else if (row.sense == RowSense::GE) viol = row.rhs - v;
        else viol = std::fabs(v - row.rhs);
        if (viol > kFeasTol) {
            if (why) {
                *why = "row " + std::to_string(i) + " viol " + std::to_string(viol) + " nnz " +
                       std::to_string(row.coeffs.size());
            }
            return false;
        }
    }
    return true;
}

}  // namespace

struct LpSolver::Impl {
    std::unique_ptr<Tableau<double>> tableau;
    bool rows_added = false;
    bool bounds_changed = false;
};

LpSolver::LpSolver(LpModel model) : model_(std::move(model)), impl_(new Impl) {}

LpSolver::~LpSolver() = default;

void LpSolver::add_rows(const std::vector<LpRow>& rows) {
    std::size_t first_new = model_.rows.size();
    for (const LpRow& row : rows) model_.add_row(row);
    if (impl_->tableau) {
        impl_->tableau->append_rows(rows);
        impl_->rows_added = true;
    }
    // Keep the fallback basis aligned with the grown row set.
    if (!saved_basis_.empty()) {
        for (std::size_t i = first_new; i < model_.rows.size(); ++i) {
            saved_basis_.push_back(model_.num_vars() + static_cast<int>(i));
        }
    }
}

void LpSolver::set_var_bounds(int var, double lower, double upper) {
    if (var < 0 || var >= model_.num_vars()) throw std::out_of_range("no such variable");
    model_.lo[var] = lower;
    model_.hi[var] = upper;
    if (impl_->tableau) {
        impl_->tableau->set_var_bounds(var, lower, upper);
        impl_->bounds_changed = true;
    }
}

LpResult LpSolver::solve() {
    static const bool debug = std::getenv("VRPSD_LP_DEBUG") != nullptr;
    auto t0 = std::chrono::steady_clock::now();
    LpResult result;
    bool need_exact = false;
    bool decided = false;

    // Retry ladder: live tableau, warm rebuild (same basis, fresh data), cold
    // rebuild, exact rational.
    for (int attempt = 0; attempt < 3 && !decided; ++attempt) {
        if (attempt == 1) {
            impl_->tableau.reset();
        } else if (attempt == 2) {
            impl_->tableau.reset();
            saved_basis_.clear();
            saved_nb_at_upper_.clear();
        }
        try {
            if (!impl_->tableau) {
                impl_->tableau.reset(new Tableau<double>(
                    model_, saved_basis_.empty() ? nullptr : &saved_basis_,
                    saved_nb_at_upper_.empty() ? nullptr : &saved_nb_at_upper_));
            } else {
                impl_->tableau->refresh_values();
            }

            Tableau<double>& tab = *impl_->tableau;
            if (!tab.run(&result.iterations)) {
                if (debug) {
                    std::fprintf(stderr, "[lp] infeasible residual=%g attempt=%d\n",
                                 tab.infeasibility(), attempt);
                }
                if (tab.infeasibility() > 1e-6) {
                    // Decisively infeasible: phase-1 float error sits many
                    // orders of magnitude below this.
                    result.status = LpStatus::Infeasible;
                    decided = true;
                    break;
                }
                if (attempt == 2) need_exact = true;
                continue;
            }
            result.x = tab.structural_values();
            if (solution_feasible(model_, result.x)) {
                result.status = LpStatus::Optimal;
                saved_basis_ = tab.logical_basis();
                saved_nb_at_upper_ = tab.nb_at_upper();
                decided = true;
                if (tab.pivots() > kPivotRebuildBudget) {
                    impl_->tableau.reset();  // refactorize on the next solve
                }
            } else {
                if (debug) {
                    std::string why;
                    solution_feasible(model_, result.x, &why);
                    std::fprintf(stderr, "[lp] feascheck failed attempt=%d rows_added=%d bounds=%d (%s)\n",
                                 attempt, impl_->rows_added ? 1 : 0,
                                 impl_->bounds_changed ? 1 : 0, why.c_str());
                }
                if (attempt == 2) need_exact = true;
            }
        } catch (const std::runtime_error& e) {
            if (debug) std::fprintf(stderr, "[lp] exception '%s' attempt=%d\n", e.what(), attempt);
            impl_->tableau.reset();
            if (attempt == 2) need_exact = true;
        }
    }

    if (!decided && need_exact) {
        result.used_exact_fallback = true;
        impl_->tableau.reset();
        Tableau<Rational> tab(model_, nullptr, nullptr);
        if (!tab.run(&result.iterations)) {
            result.status = LpStatus::Infeasible;
            saved_basis_.clear();
            saved_nb_at_upper_.clear();
            return result;
        }
        result.x = tab.structural_values();
        result.status = LpStatus::Optimal;
        saved_basis_ = tab.logical_basis();
        saved_nb_at_upper_ = tab.nb_at_upper();
    } else if (!decided) {
        result.status = LpStatus::Infeasible;
        saved_basis_.clear();
        saved_nb_at_upper_.clear();
        return result;
    }

    if (result.status == LpStatus::Infeasible) {
        impl_->tableau.reset();
        saved_basis_.clear();
        saved_nb_at_upper_.clear();
        return result;
    }

    impl_->rows_added = false;
    impl_->bounds_changed = false;
    result.obj = 0;
    for (int j = 0; j < model_.num_vars(); ++j) result.obj += model_.obj[j] * result.x[j];
    if (debug) {
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        if (ms > 20) {
            std::fprintf(stderr, "[lp] m=%zu iters=%ld exact=%d ms=%.1f\n", model_.rows.size(),
                         result.iterations, result.used_exact_fallback ? 1 : 0, ms);
        }
    }
    return result;
}

std::string LpSolver::write_lp_format() const {
    std::ostringstream out;
    out << "Minimize\n obj:";
    for (int j = 0; j < model_.num_vars(); ++j) {
        if (model_.obj[j] != 0) {
            out << (model_.obj[j] >= 0 ? " + " : " - ") << std::fabs(model_.obj[j]) << " x" << j;
        }
    }
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < model_.rows.size(); ++i) {
        const LpRow& row = model_.rows[i];
        out << " c" << i << ":";
        for (const auto& [j, c] : row.coeffs) {
            out << (c >= 0 ? " + " : " - ") << std::fabs(c) << " x" << j;
        }
        switch (row.sense) {
            case RowSense::LE: out << " <= "; break;
            case RowSense::GE: out << " >= "; break;
            case RowSense::EQ: out << " = "; break;
        }
        out << row.rhs << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < model_.num_vars(); ++j) {
        if (std::isfinite(model_.hi[j])) {
            out << " " << model_.lo[j] << " <= x" << j << " <= " << model_.hi[j] << "\n";
        } else {
            out << " x" << j << " >= " << model_.lo[j] << "\n";
        }
    }
    out << "End\n";
    return out.str();
}

LpResult solve(const LpModel& model) {
    LpSolver solver(model);
    return solver.solve();
}

}  // namespace vrpsd
