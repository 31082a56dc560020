#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace rollcast {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Binary };

/// What a variable stands for in an MSlag model; Other for generic LPs.
enum class VarRole { Production, Setup, Inventory, Backlog, Overtime, Other };

struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
    VarType type = VarType::Continuous;
    VarRole role = VarRole::Other;
    int t = -1;  // period index within the model, -1 if not applicable
    int j = -1;  // product index
    int s = -1;  // scenario index, -1 for first-stage / deterministic
};

enum class Rel { LE, EQ, GE };

struct Constraint {
    std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
    Rel rel = Rel::LE;
    double rhs = 0.0;
    std::string name;
};

/// Minimization MILP in list form. Built by the model module, consumed by
/// the solver; immutable once handed to a solve.
class MILPModel {
public:
    int add_variable(Variable v) {
        vars_.push_back(std::move(v));
        obj_.push_back(0.0);
        return static_cast<int>(vars_.size()) - 1;
    }

    void set_objective(int var, double coeff) { obj_[var] = coeff; }

    void add_constraint(Constraint c) { cons_.push_back(std::move(c)); }

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return cons_; }
    const std::vector<double>& objective() const { return obj_; }

    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_constraints() const { return cons_.size(); }

    std::size_t num_binaries() const {
        std::size_t n = 0;
        for (const auto& v : vars_)
            if (v.type == VarType::Binary) ++n;
        return n;
    }

    /// Mutable bound access, used by branch-and-bound on private copies.
    Variable& variable(int i) { return vars_[i]; }

private:
    std::vector<Variable> vars_;
    std::vector<Constraint> cons_;
    std::vector<double> obj_;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

enum class MILPStatus { Optimal, Infeasible, NodeLimit, TimeLimit };

struct MILPSolution {
    MILPStatus status = MILPStatus::Infeasible;
    double objective = 0.0;   // incumbent
    double bound = -kInf;     // best bound
    std::vector<double> x;
    std::int64_t nodes = 0;
};

struct MILPOptions {
    double abs_gap = 1e-6;
    std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
    double time_limit_sec = kInf;
};

/// Primal simplex on the LP relaxation (integrality ignored).
/// Feasibility tolerance 1e-7; Bland's rule engages after 1000 degenerate
/// pivots. Variables must have finite lower bounds.
LPSolution solve_lp(const MILPModel& model);

/// Best-bound branch-and-bound over the binary variables. Branching picks
/// the most fractional binary (lowest index on ties); the search dives
/// depth-first toward the rounded LP value and falls back to the best-bound
/// node on backtrack. Fully deterministic.
MILPSolution solve_milp(const MILPModel& model, const MILPOptions& opts = {});

/// Writes the model in the textual LP file format for external cross-checks.
void write_lp(const MILPModel& model, std::ostream& out);

} // namespace rollcast
