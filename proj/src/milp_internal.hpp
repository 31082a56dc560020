#pragma once

#include "rollcast/milp.hpp"

#include <memory>
#include <vector>

namespace rollcast {
namespace detail {

LPSolution solve_lp_bounded(const MILPModel& model, const std::vector<double>& lb,
                            const std::vector<double>& ub);

/// LP solver that can retain the final tableau of the last solve and
/// re-optimize after fixing one more variable (a branch-and-bound dive
/// step) with a handful of dual simplex pivots instead of a full
/// two-phase solve. Falls back to a cold solve on any trouble.
class WarmLp {
public:
    explicit WarmLp(const MILPModel& model);
    ~WarmLp();

    /// Cold two-phase solve; retains the tableau when optimal.
    LPSolution solve(const std::vector<double>& lb, const std::vector<double>& ub);

    /// Fix variable `var` to `v` on top of the retained tableau and
    /// re-optimize. Returns false when no tableau is retained or the
    /// fix-up gave up — the caller must cold-solve. On true, `out` holds
    /// the child optimum or an Infeasible status.
    bool refix(int var, double v, LPSolution* out);

    /// Same fixing applied to a throwaway copy of the retained tableau:
    /// the sibling branch's LP solved eagerly without disturbing the dive.
    bool refix_sibling(int var, double v, LPSolution* out);

private:
    struct Impl;
    const MILPModel& model_;
    std::unique_ptr<Impl> impl_;
    int warm_steps_ = 0;
};

} // namespace detail
} // namespace rollcast
