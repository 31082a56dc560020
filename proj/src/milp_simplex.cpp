#include "rollcast/milp.hpp"

#include "milp_internal.hpp"
#include "rollcast/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rollcast {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kPivotTol = 1e-9;
constexpr int kDegeneratePivotsBeforeBland = 1000;
constexpr long kMaxPivots = 500000;

// Dense two-phase tableau simplex over the active (non-fixed) variables.
// Lower bounds are shifted to zero; finite upper bounds are handled
// implicitly: a nonbasic variable sitting at its upper bound is stored
// complemented (x~ = u - x), so every nonbasic column is at zero and the
// usual pivoting rules apply unchanged.
class Simplex {
public:
    Simplex(const MILPModel& model, const std::vector<double>& lb, const std::vector<double>& ub)
        : model_(model), lb_(lb), ub_(ub) {}

    LPSolution run() {
        const std::size_t n = model_.num_variables();

        // Presolve: fix variables with equal bounds, map the rest to columns.
        col_of_.assign(n, -1);
        fixed_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(lb_[i]))
                throw std::invalid_argument("solve_lp: variable without finite lower bound");
            if (ub_[i] < lb_[i] - kFeasTol) return {LPStatus::Infeasible, 0.0, {}};
            if (ub_[i] - lb_[i] <= kFeasTol) {
                fixed_[i] = lb_[i];
            } else {
                col_of_[i] = num_active_++;
                active_.push_back(static_cast<int>(i));
            }
        }

        build_rows();
        if (infeasible_row_) return {LPStatus::Infeasible, 0.0, {}};
        build_tableau();

        if (!phase1()) return {LPStatus::Infeasible, 0.0, {}};
        int p2 = phase2();
        if (p2 < 0) return {LPStatus::Unbounded, 0.0, {}};

        return extract();
    }

    enum class Refix { Optimal, Infeasible, GiveUp };

    // Fix variable `var` to `v` (one of its two bounds) on the retained
    // optimal tableau and re-optimize: a few dual pivots restore primal
    // feasibility, then the usual primal pass re-proves optimality.
    Refix refix(int var, double v, LPSolution* out) {
        if (col_of_[var] < 0) return Refix::GiveUp;
        const std::size_t col = static_cast<std::size_t>(col_of_[var]);
        if (ucol_[col] <= 0.0 || !std::isfinite(ucol_[col])) return Refix::GiveUp;

        int row = -1;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] == static_cast<int>(col)) {
                row = static_cast<int>(i);
                break;
            }

        // Column target in its current orientation; complement first when the
        // fix lands on the far bound so the column always freezes at zero.
        double shift = v - lb_[var];
        double target = complemented_[col] ? ucol_[col] - shift : shift;
        if (std::abs(target - ucol_[col]) <= kFeasTol && target > kFeasTol) {
            if (row >= 0)
                complement_basic(static_cast<std::size_t>(row));
            else
                bound_flip(col);
        } else if (std::abs(target) > kFeasTol) {
            return Refix::GiveUp;  // not a bound fixing
        }
        ucol_[col] = 0.0;
        lb_[var] = v;
        ub_[var] = v;

        int d = dual_fixup();
        if (d == 0) return Refix::Infeasible;
        if (d < 0) return Refix::GiveUp;
        const std::size_t art_begin = n_struct_ + n_slack_;
        if (iterate([art_begin](std::size_t jcol) { return jcol < art_begin; }) < 0)
            return Refix::GiveUp;
        *out = extract();
        return Refix::Optimal;
    }

private:
    struct Row {
        std::vector<double> a;  // dense over active columns
        Rel rel;
        double rhs;
    };

    void build_rows() {
        // Constraint rows, rhs shifted by lower bounds and fixed variables.
        for (const auto& c : model_.constraints()) {
            Row r;
            r.a.assign(num_active_, 0.0);
            r.rel = c.rel;
            r.rhs = c.rhs;
            bool empty = true;
            for (auto [vi, coef] : c.coeffs) {
                if (coef == 0.0) continue;
                double base = (col_of_[vi] >= 0) ? lb_[vi] : fixed_[vi];
                r.rhs -= coef * base;
                if (col_of_[vi] >= 0) {
                    r.a[col_of_[vi]] += coef;
                    empty = false;
                }
            }
            if (empty) {
                bool ok = (r.rel == Rel::LE)   ? (r.rhs >= -kFeasTol)
                          : (r.rel == Rel::GE) ? (r.rhs <= kFeasTol)
                                               : (std::abs(r.rhs) <= kFeasTol);
                if (!ok) infeasible_row_ = true;
                continue;  // empty rows dropped
            }
            rows_.push_back(std::move(r));
        }
    }

    void build_tableau() {
        m_ = rows_.size();
        // Column layout: [active structurals | slacks/surplus | artificials | rhs]
        std::size_t slacks = 0;
        for (auto& r : rows_) {
            if (r.rhs < 0) {  // normalize rhs >= 0
                for (auto& v : r.a) v = -v;
                r.rhs = -r.rhs;
                r.rel = (r.rel == Rel::LE) ? Rel::GE : (r.rel == Rel::GE ? Rel::LE : Rel::EQ);
            }
            if (r.rel != Rel::EQ) ++slacks;
        }
        std::size_t artificials = 0;
        for (const auto& r : rows_) {
            if (r.rel != Rel::LE) ++artificials;
        }
        n_struct_ = num_active_;
        n_slack_ = slacks;
        n_art_ = artificials;
        width_ = n_struct_ + n_slack_ + n_art_ + 1;

        tab_.assign(m_ * width_, 0.0);
        basis_.assign(m_, -1);

        // Column upper bounds (shifted); slacks and artificials are free above.
        ucol_.assign(width_ - 1, kInf);
        complemented_.assign(width_ - 1, false);
        for (std::size_t k = 0; k < active_.size(); ++k)
            if (std::isfinite(ub_[active_[k]])) ucol_[k] = ub_[active_[k]] - lb_[active_[k]];

        std::size_t si = 0, ai = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            double* row = tab_row(i);
            std::copy(rows_[i].a.begin(), rows_[i].a.end(), row);
            row[width_ - 1] = rows_[i].rhs;
            switch (rows_[i].rel) {
                case Rel::LE:
                    row[n_struct_ + si] = 1.0;
                    basis_[i] = static_cast<int>(n_struct_ + si);
                    ++si;
                    break;
                case Rel::GE:
                    row[n_struct_ + si] = -1.0;
                    ++si;
                    row[n_struct_ + n_slack_ + ai] = 1.0;
                    basis_[i] = static_cast<int>(n_struct_ + n_slack_ + ai);
                    ++ai;
                    break;
                case Rel::EQ:
                    row[n_struct_ + n_slack_ + ai] = 1.0;
                    basis_[i] = static_cast<int>(n_struct_ + n_slack_ + ai);
                    ++ai;
                    break;
            }
        }
        cost_.assign(width_, 0.0);
    }

    double* tab_row(std::size_t i) { return tab_.data() + i * width_; }

    // Replace column `col` by its complement u - x: negate the column in every
    // row including the cost row. The rhs is untouched because the variable's
    // current value is encoded separately by the caller.
    void complement_column(std::size_t col) {
        for (std::size_t i = 0; i < m_; ++i) tab_row(i)[col] = -tab_row(i)[col];
        cost_[col] = -cost_[col];
        complemented_[col] = !complemented_[col];
    }

    // Nonbasic `col` jumps from zero to its upper bound without entering the
    // basis: shift the rhs by u and store the column complemented.
    void bound_flip(std::size_t col) {
        const double u = ucol_[col];
        for (std::size_t i = 0; i < m_; ++i) {
            double* row = tab_row(i);
            row[width_ - 1] -= row[col] * u;
        }
        cost_[width_ - 1] -= cost_[col] * u;
        complement_column(col);
    }

    // Basic variable in `row` leaves at its upper bound: rewrite the row in
    // terms of the complement so the departure happens at zero.
    void complement_basic(std::size_t row) {
        double* r = tab_row(row);
        const std::size_t b = static_cast<std::size_t>(basis_[row]);
        const double u = ucol_[b];
        for (std::size_t j = 0; j + 1 < width_; ++j)
            if (j != b) r[j] = -r[j];
        r[width_ - 1] = u - r[width_ - 1];
        complemented_[b] = !complemented_[b];
    }

    // Pivot on (row, col); updates the tableau and the cost row.
    void pivot(std::size_t row, std::size_t col) {
        double* pr = tab_row(row);
        kernels::scale(1.0 / pr[col], {pr, width_});
        pr[col] = 1.0;  // clean roundoff on the pivot element
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            double* ri = tab_row(i);
            double f = ri[col];
            if (f != 0.0) {
                kernels::axpy(-f, {pr, width_}, {ri, width_});
                ri[col] = 0.0;
            }
        }
        double f = cost_[col];
        if (f != 0.0) {
            kernels::axpy(-f, {pr, width_}, {cost_.data(), width_});
            cost_[col] = 0.0;
        }
        basis_[row] = static_cast<int>(col);
    }

    // Returns 1 on optimal, -1 on unbounded. eligible(col) filters candidate
    // entering columns.
    template <typename Eligible>
    int iterate(Eligible eligible) {
        int degenerate_streak = 0;
        bool bland = false;  // sticky: Dantzig pricing never resumes once stalled
        for (long it = 0; it < kMaxPivots; ++it) {
            bland = bland || degenerate_streak >= kDegeneratePivotsBeforeBland;

            // Entering column; every nonbasic sits at zero by construction.
            std::size_t enter = width_;  // sentinel
            double best = -kPivotTol;
            for (std::size_t jcol = 0; jcol + 1 < width_; ++jcol) {
                if (ucol_[jcol] <= 0.0) continue;  // fixed by a dive step
                if (!eligible(jcol)) continue;
                double rc = cost_[jcol];
                if (rc < best) {
                    enter = jcol;
                    best = rc;
                    if (bland) break;  // first (lowest-index) eligible column
                }
            }
            if (enter == width_) return 1;  // optimal

            // Ratio test. Three limits: a basic variable dropping to zero, a
            // basic variable reaching its upper bound, or the entering column
            // reaching its own bound (handled as a pivotless flip).
            std::size_t leave = m_;
            bool leave_at_upper = false;
            double best_ratio = ucol_[enter];
            // Pass 1: exact minimum ratio, so a tolerance tie can never admit
            // a row above the true minimum (which would drive a basic
            // variable negative and defeat Bland's rule).
            for (std::size_t i = 0; i < m_; ++i) {
                const double* ri = tab_row(i);
                double aij = ri[enter];
                if (aij > kPivotTol) {
                    best_ratio = std::min(best_ratio, ri[width_ - 1] / aij);
                } else if (aij < -kPivotTol &&
                           std::isfinite(ucol_[static_cast<std::size_t>(basis_[i])])) {
                    best_ratio = std::min(
                        best_ratio,
                        (ucol_[static_cast<std::size_t>(basis_[i])] - ri[width_ - 1]) / -aij);
                }
            }
            // Pass 2 (Harris-flavoured): rows within kFeasTol of the minimum
            // ratio are interchangeable; take the largest pivot element for
            // stability, or the lowest basis index once Bland's rule is on.
            double best_piv = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double* ri = tab_row(i);
                double aij = ri[enter];
                double ratio;
                bool at_upper;
                if (aij > kPivotTol) {
                    ratio = ri[width_ - 1] / aij;
                    at_upper = false;
                } else if (aij < -kPivotTol &&
                           std::isfinite(ucol_[static_cast<std::size_t>(basis_[i])])) {
                    ratio = (ucol_[static_cast<std::size_t>(basis_[i])] - ri[width_ - 1]) / -aij;
                    at_upper = true;
                } else {
                    continue;
                }
                if (ratio > best_ratio + kFeasTol) continue;
                bool better = leave == m_ ||
                              (bland ? basis_[i] < basis_[leave] : std::abs(aij) > best_piv);
                if (better) {
                    leave = i;
                    leave_at_upper = at_upper;
                    best_piv = std::abs(aij);
                }
            }
            if (leave == m_) {
                if (!std::isfinite(best_ratio)) return -1;  // unbounded direction
                bound_flip(enter);
                degenerate_streak = 0;
                continue;
            }

            degenerate_streak = (best_ratio <= kFeasTol) ? degenerate_streak + 1 : 0;
            if (leave_at_upper) complement_basic(leave);
            pivot(leave, enter);
        }
        throw std::runtime_error("solve_lp: pivot limit exceeded");
    }

    bool phase1() {
        if (n_art_ == 0) return true;
        // cost = sum of artificials; express in terms of nonbasic columns.
        std::fill(cost_.begin(), cost_.end(), 0.0);
        for (std::size_t jcol = n_struct_ + n_slack_; jcol + 1 < width_; ++jcol) cost_[jcol] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] >= static_cast<int>(n_struct_ + n_slack_)) {
                kernels::axpy(-1.0, {tab_row(i), width_}, {cost_.data(), width_});
                cost_[basis_[i]] = 0.0;
            }
        }
        int r = iterate([](std::size_t) { return true; });
        if (r < 0) throw std::runtime_error("solve_lp: phase 1 unbounded");
        double art_sum = -cost_[width_ - 1];  // cost row rhs holds -objective
        if (art_sum > kFeasTol) return false;

        // Drive remaining artificials out of the basis.
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < static_cast<int>(n_struct_ + n_slack_)) continue;
            double* row = tab_row(i);
            std::size_t col = width_;
            for (std::size_t jcol = 0; jcol < n_struct_ + n_slack_; ++jcol) {
                if (std::abs(row[jcol]) > kPivotTol) {
                    col = jcol;
                    break;
                }
            }
            if (col != width_) pivot(i, col);
            // else: redundant zero row; its artificial stays basic at value 0.
        }
        compact_artificials();
        return true;
    }

    // Phase 2 never lets artificials re-enter, so drop their columns (keeping
    // the few still basic in redundant rows) to shrink every later pivot.
    void compact_artificials() {
        if (n_art_ == 0) return;
        const std::size_t art_begin = n_struct_ + n_slack_;
        std::vector<int> newcol(width_ - 1, -1);
        std::size_t nw = 0;
        for (std::size_t j = 0; j < art_begin; ++j) newcol[j] = static_cast<int>(nw++);
        for (std::size_t i = 0; i < m_; ++i) {
            std::size_t b = static_cast<std::size_t>(basis_[i]);
            if (b >= art_begin && newcol[b] < 0) newcol[b] = static_cast<int>(nw++);
        }
        const std::size_t new_width = nw + 1;
        if (new_width == width_) return;

        std::vector<double> nt(m_ * new_width, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double* src = tab_row(i);
            double* dst = nt.data() + i * new_width;
            for (std::size_t j = 0; j + 1 < width_; ++j)
                if (newcol[j] >= 0) dst[newcol[j]] = src[j];
            dst[new_width - 1] = src[width_ - 1];
        }
        std::vector<double> nu(new_width - 1, kInf);
        std::vector<char> nc(new_width - 1, false);
        for (std::size_t j = 0; j + 1 < width_; ++j) {
            if (newcol[j] < 0) continue;
            nu[newcol[j]] = ucol_[j];
            nc[newcol[j]] = complemented_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) basis_[i] = newcol[basis_[i]];

        tab_ = std::move(nt);
        ucol_ = std::move(nu);
        complemented_ = std::move(nc);
        n_art_ = new_width - 1 - art_begin;
        width_ = new_width;
        cost_.assign(width_, 0.0);
    }

    // Dual pivots until every basic value is back inside its bounds.
    // Returns 1 on feasible, 0 on provable infeasibility, -1 on give-up.
    // Infeasibility needs no dual-feasible cost row: a violated row with no
    // negative entry over movable columns bounds its basic variable below 0.
    int dual_fixup() {
        const std::size_t art_begin = n_struct_ + n_slack_;
        const int cap = static_cast<int>(m_) + 200;
        for (int it = 0; it < cap; ++it) {
            std::size_t r = m_;
            double worst = -kFeasTol;
            bool above = false;
            for (std::size_t i = 0; i < m_; ++i) {
                double b = tab_row(i)[width_ - 1];
                double ub = ucol_[static_cast<std::size_t>(basis_[i])];
                if (b < worst) {
                    r = i;
                    worst = b;
                    above = false;
                }
                if (std::isfinite(ub) && ub - b < worst) {
                    r = i;
                    worst = ub - b;
                    above = true;
                }
            }
            if (r == m_) return 1;
            if (above) complement_basic(r);

            const double* rr = tab_row(r);
            std::size_t enter = width_;
            double best_ratio = kInf;
            for (std::size_t j = 0; j < art_begin; ++j) {
                if (ucol_[j] <= 0.0) continue;
                double a = rr[j];
                if (a >= -kPivotTol) continue;
                double ratio = cost_[j] / -a;
                if (ratio < best_ratio - 1e-12) {
                    best_ratio = ratio;
                    enter = j;
                }
            }
            if (enter == width_) return 0;
            pivot(r, enter);
        }
        return -1;
    }

    int phase2() {
        std::fill(cost_.begin(), cost_.end(), 0.0);
        const auto& obj = model_.objective();
        for (std::size_t k = 0; k < active_.size(); ++k)
            cost_[k] = complemented_[k] ? -obj[active_[k]] : obj[active_[k]];
        for (std::size_t i = 0; i < m_; ++i) {
            int b = basis_[i];
            double cb = cost_[b];
            if (cb != 0.0) {
                kernels::axpy(-cb, {tab_row(i), width_}, {cost_.data(), width_});
                cost_[b] = 0.0;
            }
        }
        const std::size_t art_begin = n_struct_ + n_slack_;
        return iterate([art_begin](std::size_t jcol) { return jcol < art_begin; });
    }

    LPSolution extract() {
        LPSolution sol;
        sol.status = LPStatus::Optimal;
        sol.x.assign(model_.num_variables(), 0.0);

        // Column values in shifted space: nonbasic at zero, basic from rhs.
        std::vector<double> val(width_ - 1, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            val[static_cast<std::size_t>(basis_[i])] = tab_row(i)[width_ - 1];
        for (std::size_t k = 0; k < active_.size(); ++k) {
            double v = complemented_[k] ? ucol_[k] - val[k] : val[k];
            sol.x[active_[k]] = lb_[active_[k]] + v;
        }
        for (std::size_t i = 0; i < model_.num_variables(); ++i)
            if (col_of_[i] < 0) sol.x[i] = fixed_[i];

        const auto& obj = model_.objective();
        sol.objective = kernels::dot({obj.data(), obj.size()}, {sol.x.data(), sol.x.size()});
        return sol;
    }

    const MILPModel& model_;
    std::vector<double> lb_, ub_;

    std::vector<int> col_of_;
    std::vector<double> fixed_;
    std::vector<int> active_;
    std::size_t num_active_ = 0;
    bool infeasible_row_ = false;

    std::vector<Row> rows_;
    std::size_t m_ = 0, n_struct_ = 0, n_slack_ = 0, n_art_ = 0, width_ = 0;
    std::vector<double> tab_;
    std::vector<double> cost_;
    std::vector<double> ucol_;
    std::vector<char> complemented_;
    std::vector<int> basis_;
};

} // namespace

namespace detail {

LPSolution solve_lp_bounded(const MILPModel& model, const std::vector<double>& lb,
                            const std::vector<double>& ub) {
    return Simplex(model, lb, ub).run();
}

struct WarmLp::Impl {
    Simplex simplex;
    Impl(const MILPModel& model, const std::vector<double>& lb, const std::vector<double>& ub)
        : simplex(model, lb, ub) {}
};

namespace {
// Cold refactorization cadence: dive tableaus accumulate roundoff without a
// periodic rebuild.
constexpr int kMaxWarmSteps = 64;
} // namespace

WarmLp::WarmLp(const MILPModel& model) : model_(model) {}
WarmLp::~WarmLp() = default;

LPSolution WarmLp::solve(const std::vector<double>& lb, const std::vector<double>& ub) {
    impl_ = std::make_unique<Impl>(model_, lb, ub);
    LPSolution sol = impl_->simplex.run();
    if (sol.status != LPStatus::Optimal) impl_.reset();
    warm_steps_ = 0;
    return sol;
}

bool WarmLp::refix(int var, double v, LPSolution* out) {
    if (!impl_ || warm_steps_ >= kMaxWarmSteps) {
        impl_.reset();
        return false;
    }
    ++warm_steps_;
    switch (impl_->simplex.refix(var, v, out)) {
        case Simplex::Refix::Optimal:
            return true;
        case Simplex::Refix::Infeasible:
            impl_.reset();
            *out = {LPStatus::Infeasible, 0.0, {}};
            return true;
        case Simplex::Refix::GiveUp:
            impl_.reset();
            return false;
    }
    return false;
}

bool WarmLp::refix_sibling(int var, double v, LPSolution* out) {
    if (!impl_) return false;
    Impl scratch(*impl_);
    switch (scratch.simplex.refix(var, v, out)) {
        case Simplex::Refix::Optimal:
            return true;
        case Simplex::Refix::Infeasible:
            *out = {LPStatus::Infeasible, 0.0, {}};
            return true;
        case Simplex::Refix::GiveUp:
            return false;
    }
    return false;
}

} // namespace detail

LPSolution solve_lp(const MILPModel& model) {
    std::vector<double> lb, ub;
    lb.reserve(model.num_variables());
    ub.reserve(model.num_variables());
    for (const auto& v : model.variables()) {
        if (v.type == VarType::Binary) {
            lb.push_back(std::max(v.lb, 0.0));
            ub.push_back(std::min(v.ub, 1.0));
        } else {
            lb.push_back(v.lb);
            ub.push_back(v.ub);
        }
    }
    return detail::solve_lp_bounded(model, lb, ub);
}

} // namespace rollcast
